#pragma once

#include "bvlat/lagrangian.hpp"
#include "bvlat/products.hpp"

namespace bvlat {

/// Graded BV Laplacian: sum over field species a of
///   (-1)^{|a|} sum_x d^2/dphi_a_af(x) dphi_a(x)
/// with left derivatives. The sign convention is pinned by the identity
/// suite (nilpotency, bracket defect, Schwinger-Dyson); one global choice is
/// made for all arguments.
Functional bv_laplacian(Functional const &Q);

/// Scale-Lambda Laplacian with the free kinetic insertion: kernel
/// M = K (h_Lambda - H), acting as sum_{z,y} M(z,y) d^2/dphi_af(z) dphi(y)
/// over kinetic species.
Functional bv_laplacian_scale(Functional const &Q, Model const &m, Mat const &hL);

enum class BracketMode { geometric, timeordered, star, scale };

/// Antibracket of the matching product: the failure of the matching
/// Laplacian to be a derivation. geometric/timeordered/star modes use the
/// first-order two-term formula directly; scale mode is the defect of
/// bv_laplacian_scale over the scale time-ordered product. hL is required
/// for scale mode only. kinetic_only restricts the species sum to the
/// propagating sector, the part tied to the free field equations.
Functional antibracket(Functional const &P, Functional const &Q, Model const &m, BracketMode mode,
                       Mat const *hL = nullptr, bool kinetic_only = false);

/// The same bracket computed as a Laplacian defect, for cross-checking.
Functional antibracket_defect(Functional const &P, Functional const &Q, Model const &m,
                              BracketMode mode, Mat const *hL = nullptr);

/// {A, S0}_prod = sum_{a kinetic, x in W} s2 * (dA/dphi_a_af(x)) prod (K phi_a)(x).
/// The free action enters through its field equations on the window;
/// antifield support of A outside the window is rejected.
Functional bracket_eom(Functional const &A, Model const &m, BinOp const &prod);

/// {A, S0 + theta0}_mode with optional linear BRST term theta0
Functional bracket_action(Functional const &A, Model const &m, BracketMode mode,
                          Functional const *theta0 = nullptr);

/// Classical Koszul map: delta_S(X) = partial_X L(f) with f = 1 on a stencil
/// neighbourhood of supp X. With the default free action this is the
/// contraction of X with the field equations.
Functional koszul_classical(Functional const &X, Lagrangian const &L, Model const &m);
Functional koszul_classical_free(Functional const &X, Model const &m);
/// Time-ordered Koszul map T o delta_{T^-1 S} o T^-1 for the free action.
Functional koszul_timeordered_free(Functional const &X, Model const &m);
/// Scale-Lambda Koszul map for the free action.
Functional koszul_scale_free(Functional const &X, Model const &m, Mat const &hL);

/// Quantum BV operator in the non-renormalized theory:
///   s X = e_T^{-iV/h} .T { e_T^{iV/h} .T X , S0 (+ theta0) }_star
Functional qbv_hat(Functional const &X, Functional const &V, Model const &m,
                   PerturbativeOrders const &o, Functional const *theta0 = nullptr);
VSeries qbv_hat_series(Functional const &X, Functional const &V, Model const &m,
                       PerturbativeOrders const &o, Functional const *theta0 = nullptr);

/// Master-equation residual in the literature form
///   {V,S0}_T + (1/2){V,V}_T - i hbar lap V,
/// an exact multiple of the bracket form (see qme_bracket_route).
Functional qme_residual(Functional const &V, Model const &m, PerturbativeOrders const &o);
VSeries qme_residual_series(Functional const &V, Model const &m, PerturbativeOrders const &o);
/// e_T^{-iV/h} .T { e_T^{iV/h}, S0 }_star as a series; equals i/hbar times
/// the literature form, exactly.
VSeries qme_bracket_route(Functional const &V, Model const &m, PerturbativeOrders const &o);

/// Regularized (scale-Lambda) residual, three-term form
///   delta^L_{S0} V + (1/2){V,V}_L - i hbar lap_L V
Functional qme_residual_scale(Functional const &V, Model const &m, PerturbativeOrders const &o,
                              Mat const &hL);
VSeries qme_residual_scale_series(Functional const &V, Model const &m, PerturbativeOrders const &o,
                                  Mat const &hL);
VSeries qme_bracket_route_scale(Functional const &V, Model const &m, PerturbativeOrders const &o,
                                Mat const &hL);

/// Gauge-fixing automorphism alpha_psi(X) = sum_n {psi,...{psi,X}_T...}/n!;
/// terminates because each bracket lowers the antifield number.
Functional gauge_fermion_auto(Functional const &psi, Functional const &X, Model const &m);

/// Normal form modulo the linear ideal of the free field equations on the
/// window, by exact elimination with a fixed pivot order (latest sites
/// eliminated first). F == G on shell iff the normal forms agree.
Functional onshell_reduce(Functional const &F, Model const &m);

/// Verifies { e_T^{iV/h} .T X , theta0 }_T = { ... }_star exactly at orders.
/// Returns the difference (zero on success). Throws if {S0,theta0}_T != 0.
std::pair<bool, Functional> theta_identity_check(Functional const &V, Functional const &X,
                                                 Functional const &theta0, Model const &m,
                                                 PerturbativeOrders const &o);

/// Default regulator family h_Lambda = H + i Lambda/(Lambda+1) Delta_D,
/// reaching H_F = H + i Delta_D entrywise as Lambda grows.
struct ScaleFamily {
	std::function<Mat(mpq_class const &)> h;
	Mat limit;
	static ScaleFamily default_family(Model const &m);
	Mat at(mpq_class const &lambda) const;
};

} // namespace bvlat
