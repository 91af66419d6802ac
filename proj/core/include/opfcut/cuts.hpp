#pragma once

#include <array>
#include <optional>
#include <vector>

#include "opfcut/lifted_model.hpp"
#include "opfcut/linear.hpp"
#include "opfcut/netcase.hpp"

namespace opfcut {

inline constexpr double kCutViolationTol = 1e-6;  // on unit-normalized cuts
inline constexpr double kPsdTol = 1e-8;

// Known upper bounds on |(g,b).(e,f)| and |(-b,g).(e,f)| at one bus of a
// branch. Without an angle interval both equal sqrt(g^2+b^2)*Vmax.
struct DeltaBounds {
  double mu = 0, nu = 0;
};

DeltaBounds delta_bounds(const BranchParams& br, double Vmax_k,
                         const std::optional<AngleInterval>& interval = std::nullopt);

/// The four static inequalities bounding |Pkm| and |Pmk| by the weighted
/// absolute-difference variables; kb bounds the k-end forms, mb the m-end.
std::vector<Cut> delta_cuts(const Network& net, const ModelInstance& m,
                            int branch_j, const DeltaBounds& kb,
                            const DeltaBounds& mb);

enum class BranchEnd { SendingAtK, ReceivingAtM };

/// Loss-inequality separation at the LP point: tangent to
/// g*dE^2 + g*dF^2 <= Pkm + Pmk - (g_sh/2)(V2_k/tau^2 + V2_m).
/// `end` picks which difference-variable pair carries the quadratic.
/// Branches with g < 0 are skipped.
std::optional<Cut> loss_separate(const Network& net, const ModelInstance& m,
                                 int branch_j, const LiftedPoint& pt,
                                 BranchEnd end = BranchEnd::ReceivingAtM,
                                 double tol = kCutViolationTol);

/// Second-order-cone separation of the sending/receiving power circle.
std::optional<Cut> circle_separate(const Network& net, const ModelInstance& m,
                                   int branch_j, const LiftedPoint& pt,
                                   BranchEnd end, double tol = kCutViolationTol);

/// Tangent cut for the apparent-power rating at one end (no-op if rateA=0).
std::optional<Cut> rating_separate(const Network& net, const ModelInstance& m,
                                   int branch_j, const LiftedPoint& pt,
                                   BranchEnd end, double tol = kCutViolationTol);

struct PsdCertificate {
  std::array<double, 9> u{};  // unit vector, first `dim` entries used
  int dim = 0;
  double value = 0;  // u' M u < 0
};

/// Minimum-eigenvalue certificate for small symmetric matrices (dim <= 9)
/// via cyclic Jacobi sweeps; nullopt when M is PSD within tol. M is row-major
/// dim*dim and gets symmetrized internally.
std::optional<PsdCertificate> psd_certificate(const double* M, int dim,
                                              double tol = kPsdTol);

struct SdpSubset {
  int branch_j = -1;       // >= 0: the per-branch subset (ek, fk, em, fm)
  std::vector<int> buses;  // else: explicit bus indices (every pair must share a branch)
  bool include_one = false;  // prepend the constant-1 coordinate
};

/// Assembles the moment submatrix of the subset from the point's product
/// variables and emits the certificate inequality u'Wu >= 0 when one exists.
std::optional<Cut> sdp_separate(const ModelInstance& m, const LiftedPoint& pt,
                                const SdpSubset& subset,
                                double tol = kCutViolationTol);

/// Cost-epigraph separation: tangent at the LP point's generator output.
std::optional<Cut> cost_separate(const Network& net, const ModelInstance& m,
                                 int gen_j, const LiftedPoint& pt,
                                 double tol = kCutViolationTol);

/// Supporting (zero-violation) cuts of every family at the given point,
/// regardless of violation; used to stress exact embedded points.
std::vector<Cut> supporting_cuts(const Network& net, const ModelInstance& m,
                                 int branch_j, const LiftedPoint& pt);

}  // namespace opfcut
