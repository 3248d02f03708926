#ifndef USCRL_TYPES_HPP_
#define USCRL_TYPES_HPP_

#include <cstdint>
#include <limits>

#include <boost/multiprecision/cpp_int.hpp>

namespace uscrl {

using SampleIndex = std::uint32_t;
using ClassId = std::uint32_t;

// Exact tuple counts; |T_c| grows like (N_c+)^2 (N_c-)^k.
using BigCount = boost::multiprecision::cpp_int;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace uscrl

#endif  // USCRL_TYPES_HPP_
