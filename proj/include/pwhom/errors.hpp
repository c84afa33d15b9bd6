#ifndef PWHOM_ERRORS_HPP
#define PWHOM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace pwh {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define PWH_DEFINE_ERROR(Name)                                       \
  struct Name : Error {                                              \
    explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
  }

PWH_DEFINE_ERROR(SingularBasis);
PWH_DEFINE_ERROR(GridTooCoarse);
PWH_DEFINE_ERROR(ShapeMismatch);
PWH_DEFINE_ERROR(SingularPointwise);
PWH_DEFINE_ERROR(IndefiniteCoefficient);
PWH_DEFINE_ERROR(NoConvergence);
PWH_DEFINE_ERROR(LambdaInadmissible);
PWH_DEFINE_ERROR(TruncationTooTight);
PWH_DEFINE_ERROR(SearchFailed);
PWH_DEFINE_ERROR(NotPositive);
PWH_DEFINE_ERROR(DegenerateFit);
PWH_DEFINE_ERROR(ConfigError);

#undef PWH_DEFINE_ERROR

}  // namespace pwh

#endif
