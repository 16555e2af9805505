#pragma once

#include <stdexcept>
#include <string>

namespace sea {

// Base for every error raised by the library. Catch this at the CLI boundary.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define SEA_DEFINE_ERROR(Name)                    \
  class Name : public Error {                     \
   public:                                        \
    explicit Name(const std::string& what)        \
        : Error(std::string(#Name ": ") + what) {} \
  }

// geometry
SEA_DEFINE_ERROR(InfeasibleGeometry);
SEA_DEFINE_ERROR(DegenerateAngle);

// linear algebra / controller design
SEA_DEFINE_ERROR(NotHurwitz);
SEA_DEFINE_ERROR(SolveSingular);
SEA_DEFINE_ERROR(MatchingInfeasible);

// numerics
SEA_DEFINE_ERROR(NonFiniteDerivative);
SEA_DEFINE_ERROR(InsufficientTrace);
SEA_DEFINE_ERROR(EmptyTrace);

// io
SEA_DEFINE_ERROR(ParseError);
SEA_DEFINE_ERROR(ValidationError);
SEA_DEFINE_ERROR(FileNotFound);
SEA_DEFINE_ERROR(BadCsv);
SEA_DEFINE_ERROR(UnknownColumn);
SEA_DEFINE_ERROR(IoError);

#undef SEA_DEFINE_ERROR

}  // namespace sea
