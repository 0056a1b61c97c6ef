#pragma once

#include <functional>
#include <random>

#include "bvlat/model.hpp"

namespace bvlat {

/// Single-site polynomial template vanishing at the zero configuration;
/// a density d gives the local rule f |-> sum_x f(x) d(x).
struct Density {
	// each term: list of (species id, power) at the implied site, coefficient
	std::vector<std::pair<std::vector<std::pair<int, uint32_t>>, Scalar>> terms;
	Functional at_site(Model const &m, int x, int trunc) const;
};

/// A map from rational test vectors to functionals obeying the support and
/// additivity axioms. Construct through make_lagrangian, which samples the
/// axioms and rejects violating rules.
struct Lagrangian {
	int arity = 1;
	std::function<Functional(std::vector<std::vector<Scalar>> const &, int trunc)> rule;

	Functional operator()(std::vector<Scalar> const &f, int trunc) const
	{
		return rule({f}, trunc);
	}
};

Lagrangian make_lagrangian(Model const &m, int arity,
                           std::function<Functional(std::vector<std::vector<Scalar>> const &, int)> rule,
                           std::mt19937_64 &rng, int samples = 12);

/// L0(f) = 1/2 sum_t f(t) phi(t) (K phi)(t)
Lagrangian free_lagrangian(Model const &m, std::mt19937_64 &rng);
Lagrangian density_lagrangian(Model const &m, Density d, std::mt19937_64 &rng);

Functional lagrangian_apply(Lagrangian const &L, std::vector<Scalar> const &f, int trunc);

/// Samples supp((L1-L2)(f)) subset supp(df); returns a counterexample test
/// vector on failure.
std::optional<std::vector<Scalar>> lagrangian_equiv(Lagrangian const &L1, Lagrangian const &L2,
                                                    Model const &m, std::mt19937_64 &rng,
                                                    int samples = 24, int trunc = 2);

} // namespace bvlat
