#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "tdiff/geom.hpp"

namespace tdiff::detail {

using Mat = Eigen::MatrixXd;
using Col = Eigen::VectorXd;

inline Col to_eigen(const Vec& v) { return Eigen::Map<const Col>(v.data(), static_cast<Eigen::Index>(v.size())); }
inline Vec to_vec(const Col& c) { return Vec(c.data(), c.data() + c.size()); }

// Orthonormal basis (columns) of the null space of M; M has d columns.
Mat kernel(const Mat& M, int d, double tol = 1e-9);
int rank_of(const Mat& M, double tol = 1e-9);

// Calls fn on every r-subset of {0..k-1} in lexicographic order until fn returns true.
void for_each_combo(int k, int r, const std::function<bool(const std::vector<int>&)>& fn);

}  // namespace tdiff::detail
