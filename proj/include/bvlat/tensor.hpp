#pragma once

#include "bvlat/functional.hpp"

namespace bvlat {

/// Symmetric tensor decomposition of a multilocal functional. Slots are
/// single-site monomials with strictly ascending sites; the rank of a term
/// is the number of distinct sites it touches. On the lattice the thin
/// diagonal is fat, so site-disjointness is what separates the ranks: a
/// same-site product of locals IS a local.
struct MultilocalTensor {
	SpeciesTable const *tab = nullptr;
	int trunc = 0;
	// key: slot list (rank = size); empty key = the rank-0 constant
	std::map<std::vector<Monomial>, HbarSeries> comp;

	int max_rank() const;
};

/// beta = m^{-1}: the unique site-disjoint tensor with m(tensor) = F.
/// Throws when a term touches more than max_rank sites.
MultilocalTensor beta_decompose(Functional const &F, int max_rank);

/// m: multiply the slots back out (the inverse of beta_decompose).
Functional tensor_multiply(MultilocalTensor const &T);

} // namespace bvlat
