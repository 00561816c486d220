#pragma once

#include <stdexcept>
#include <string>

namespace hypermix {

// Every failure the library raises derives from Error, so callers can catch
// once at the top and still switch on the concrete kind when it matters.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define HYPERMIX_DEFINE_ERROR(Name)                                          \
    class Name : public Error {                                              \
    public:                                                                  \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

HYPERMIX_DEFINE_ERROR(ZeroParameter);
HYPERMIX_DEFINE_ERROR(IllConditioned);
HYPERMIX_DEFINE_ERROR(CapExceeded);
HYPERMIX_DEFINE_ERROR(IndexOutOfRange);
HYPERMIX_DEFINE_ERROR(DependentFunctionals);
HYPERMIX_DEFINE_ERROR(IncompleteGrade);
HYPERMIX_DEFINE_ERROR(NonpositiveEpsilon);
HYPERMIX_DEFINE_ERROR(NotReachable);
HYPERMIX_DEFINE_ERROR(Inconclusive);
HYPERMIX_DEFINE_ERROR(DegreeTooHigh);
HYPERMIX_DEFINE_ERROR(GridMismatch);
HYPERMIX_DEFINE_ERROR(SupportEscape);
HYPERMIX_DEFINE_ERROR(InvalidArgument);

#undef HYPERMIX_DEFINE_ERROR

/// Schema violation in an experiment config; `field` is a JSON-pointer-ish path.
class ValidationError : public Error {
public:
    ValidationError(std::string field, const std::string& what)
        : Error("ValidationError at '" + field + "': " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

} // namespace hypermix
