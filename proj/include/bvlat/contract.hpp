#pragma once

#include "bvlat/model.hpp"

namespace bvlat {

/// m o exp( sum_{a kinetic} sum_{x,y} u*P(x,y) d/dphi_a(x) (x) d/dphi_a(y) )
/// applied to F (x) G. The per-contraction weight is u*P(x,y); the 1/2 of the
/// star kernel, when needed, lives in u.
Functional biproduct(Functional const &F, Functional const &G, Model const &m, Mat const &P,
                     HbarSeries const &u);

/// exp( (1/2) sum_{a kinetic} sum_{x,y} u*P(x,y) d^2/dphi_a(x)dphi_a(y) ) F,
/// the single-argument operator convention: the 1/2 is included here.
Functional op_exp(Functional const &F, Model const &m, Mat const &P, HbarSeries const &u);

/// sign carried by (d/dphi_a_af P) * (d/dphi_a Q) in the antibracket, for the
/// first-argument parity p; the companion of s1 below
inline int bracket_sign2(bool species_odd, int p)
{
	return (species_odd && ((1 + p) & 1)) ? -1 : 1;
}
/// sign carried by (d/dphi_a P) * (d/dphi_a_af Q)
inline int bracket_sign1(bool species_odd, int p)
{
	int a = species_odd ? 1 : 0;
	int e = a + (a + 1) * (p + a);
	return (e & 1) ? -1 : 1;
}

/// sum_{a in ids, x} s2(a,|Y|) (dY/dphi_a_af(x)) prod (dF/dphi_a(x)); the
/// contraction of a vector field with the derivative of F, mode-agnostic via
/// the supplied binary product.
Functional vf_pairing(Functional const &Y, Functional const &F,
                      std::function<Functional(Functional const &, Functional const &)> const &prod,
                      SpeciesTable const &tab, std::vector<int> const &ids, int n_sites);

} // namespace bvlat
