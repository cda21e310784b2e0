#pragma once

#include <stdexcept>
#include <string>

namespace wow {

/// Base class for every error thrown by the library.
struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

#define WOW_DEFINE_ERROR(Name)                                  \
  struct Name : Error {                                         \
    explicit Name(const std::string& what = #Name) : Error(what) {} \
  }

WOW_DEFINE_ERROR(InvalidMeasure);
WOW_DEFINE_ERROR(EmptyMeasure);
WOW_DEFINE_ERROR(DimMismatch);
WOW_DEFINE_ERROR(DimNotOne);
WOW_DEFINE_ERROR(MarginalMismatch);
WOW_DEFINE_ERROR(IndexMismatch);
WOW_DEFINE_ERROR(NotEqualSize);
WOW_DEFINE_ERROR(UnsupportedNorm);
WOW_DEFINE_ERROR(UnsupportedCost);
WOW_DEFINE_ERROR(BudgetExceeded);
WOW_DEFINE_ERROR(NumericalFailure);
WOW_DEFINE_ERROR(PushforwardMismatch);
WOW_DEFINE_ERROR(ParseError);
WOW_DEFINE_ERROR(InvalidArgument);

#undef WOW_DEFINE_ERROR

}  // namespace wow
