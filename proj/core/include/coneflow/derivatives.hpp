#pragma once

// Second-order differences on the log-polar grid: centred inside, one-sided
// on the edges. With s = ln R,
//   d_eta = (cos d_s - sin d_theta) / R,  d_z = (sin d_s + cos d_theta) / R.

#include "coneflow/sector.hpp"

namespace coneflow {

Field2D d_ds(const Field2D& f);
Field2D d_dtheta(const Field2D& f);
Field2D d_eta(const Field2D& f);
Field2D d_z(const Field2D& f);

/// Frobenius norm of the Cartesian Hessian, from
///   R^2 H_RR = f_ss - f_s, R^2 H_Rt = f_st - f_t, R^2 H_tt = f_tt + f_s.
Field2D hessian_norm(const Field2D& f);

}  // namespace coneflow
