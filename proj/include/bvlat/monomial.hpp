#pragma once

#include <optional>
#include <set>
#include <utility>
#include <vector>

#include "bvlat/species.hpp"

namespace bvlat {

/// Canonically ordered product of generators: factors sorted by generator
/// key, powers >= 1, odd generators with power exactly 1. Monomials are
/// stored sign-free; Koszul signs produced by reordering flow into the
/// coefficients.
struct Monomial {
	std::vector<std::pair<Gen, uint32_t>> f;

	bool is_one() const { return f.empty(); }
	int degree() const
	{
		int d = 0;
		for (auto &[g, p] : f)
			d += int(p);
		return d;
	}
	auto operator<=>(Monomial const &) const = default;
};

int mono_parity(Monomial const &m, SpeciesTable const &tab);
int mono_ghost(Monomial const &m, SpeciesTable const &tab);
int mono_afnum(Monomial const &m, SpeciesTable const &tab);
std::set<int> mono_support(Monomial const &m);

/// Product with the Koszul sign accumulated from transposing odd factors.
/// Returns nothing when an odd generator repeats.
std::optional<std::pair<Monomial, int>> mono_mul(Monomial const &a, Monomial const &b,
                                                 SpeciesTable const &tab);

/// Left partial derivative: returns the reduced monomial together with the
/// integer multiplicity (power for even generators) carrying the Koszul sign
/// picked up by moving an odd derivative past the odd factors to its left.
/// Returns nothing when the generator is absent.
std::optional<std::pair<Monomial, long>> mono_derive_left(Monomial const &m, Gen g,
                                                          SpeciesTable const &tab);

/// Koszul sign of the permutation perm (as images), counting only
/// transpositions of odd slots; parity[i] is the parity of slot i.
int koszul_sign_of_permutation(std::vector<int> const &perm, std::vector<int> const &parity);

std::string mono_str(Monomial const &m, SpeciesTable const &tab);

} // namespace bvlat
