#pragma once

#include "bvlat/contract.hpp"

namespace bvlat {

/// Double truncation: results are exact representatives modulo hbar^{hbar+1}
/// and modulo interaction order v+1. Internal arithmetic runs at truncation
/// hbar+v so that the 1/hbar weights of interaction exponentials never shed
/// coefficients that could flow back below hbar^{hbar+1}.
struct PerturbativeOrders {
	int hbar = 2;
	int v = 2;
	int work() const { return hbar + v; }
};

using BinOp = std::function<Functional(Functional const &, Functional const &)>;

Functional star(Functional const &F, Functional const &G, Model const &m);
Functional tprod(Functional const &F, Functional const &G, Model const &m);
Functional time_order(Functional const &F, Model const &m, bool inverse = false);
/// normal-ordering automorphism alpha_H = exp(hbar Gamma_H)
Functional alpha_H(Functional const &F, Model const &m, bool inverse = false);
Functional star_H(Functional const &F, Functional const &G, Model const &m);

/// scale-Lambda regularized time ordering, kernel h_Lambda - H
Functional tprod_scale(Functional const &F, Functional const &G, Model const &m, Mat const &hL);
Functional time_order_scale(Functional const &F, Model const &m, Mat const &hL,
                            bool inverse = false);

BinOp star_op(Model const &m);
BinOp tprod_op(Model const &m);
BinOp pointwise_op();

/// Formal series in the interaction order: c[k] is the lambda^k coefficient.
struct VSeries {
	std::vector<Functional> c;

	static VSeries zero(SpeciesTable const *tab, int trunc, int vmax);
	static VSeries unit(SpeciesTable const *tab, int trunc, int vmax);
	int vmax() const { return int(c.size()) - 1; }
	bool is_zero() const;
	Functional sum() const;
	VSeries &operator+=(VSeries const &o);
	VSeries &operator-=(VSeries const &o);
	friend VSeries operator+(VSeries a, VSeries const &b) { return a += b; }
	friend VSeries operator-(VSeries a, VSeries const &b) { return a -= b; }
	friend bool operator==(VSeries const &a, VSeries const &b) { return a.c == b.c; }
};

VSeries vs_mul(VSeries const &a, VSeries const &b, BinOp const &prod);
/// componentwise a.c[k] prod X
VSeries vs_apply(VSeries const &a, Functional const &X, BinOp const &prod);
VSeries vs_map(VSeries const &a, std::function<Functional(Functional const &)> const &f);
/// exp of a series without constant term
VSeries vs_exp(VSeries const &A, BinOp const &prod);
/// inverse of a series with constant term 1, by the geometric series
VSeries vs_inverse(VSeries const &S, BinOp const &prod);
VSeries vs_scaled(VSeries const &a, Scalar const &s);

/// e_T^{+-i V/hbar} as a lambda-graded series at the working truncation
VSeries exp_iv_over_hbar(Functional const &V, Model const &m, PerturbativeOrders const &o,
                         int sign = +1);

/// checks supp V inside the window
void require_window_support(Functional const &V, Model const &m, char const *what);

/// the time-ordered exponential e_T^V = sum_k V^{T k}/k!
Functional smatrix(Functional const &V, Model const &m, PerturbativeOrders const &o);
VSeries smatrix_series(Functional const &V, Model const &m, PerturbativeOrders const &o);

/// S(V)^{star -1} star S(V+F)
Functional bogoliubov_smatrix(Functional const &V, Functional const &F, Model const &m,
                              PerturbativeOrders const &o);

VSeries retarded_map_series(Functional const &V, Functional const &F, Model const &m,
                            PerturbativeOrders const &o, bool inverse = false);
Functional retarded_map(Functional const &V, Functional const &F, Model const &m,
                        PerturbativeOrders const &o, bool inverse = false);

Functional interacting_star(Functional const &F, Functional const &G, Functional const &V,
                            Model const &m, PerturbativeOrders const &o);

/// time ordering of a vector field (#af = 1): the antifield factors are
/// spectators, T acts on the coefficients
Functional timeorder_vectorfield(Functional const &X, Model const &m, bool inverse = false);

/// derivation paired to a time-ordered vector field Y:
///   dT_Y F = T< T^-1 Y, (T^-1 F)^(1) >
Functional tder(Functional const &Y, Functional const &F, Model const &m);

/// truncate a finished result to the declared hbar order, demanding that no
/// negative powers survived
Functional finish(Functional const &F, PerturbativeOrders const &o, char const *what);

} // namespace bvlat
