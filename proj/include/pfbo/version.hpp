#ifndef PFBO_VERSION_HPP
#define PFBO_VERSION_HPP

namespace pfbo {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pfbo

#endif  // PFBO_VERSION_HPP
