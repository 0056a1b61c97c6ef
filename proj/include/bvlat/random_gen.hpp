#pragma once

#include <random>

#include "bvlat/model.hpp"

namespace bvlat {

struct RandomSpec {
	int max_degree = 4;
	int max_af = 3;
	int max_terms = 4;
	bool window_only = true;
	/// restrict to propagating species and their antifields; the
	/// Schwinger-Dyson identities pair antifields of propagating species
	/// with the free field equations, so their sampling lives here
	bool kinetic_sector_only = false;
	int hbar_max = 0;
	bool complex_coeffs = true;
	bool allow_constant = true;
};

inline Functional random_functional(Model const &m, std::mt19937_64 &rng, RandomSpec const &s,
                                    int trunc)
{
	auto const &tab = m.species();
	std::vector<int> pool;
	if (s.kinetic_sector_only) {
		for (int a : tab.kinetic_ids()) {
			pool.push_back(a);
			pool.push_back(tab[a].partner);
		}
	} else {
		for (int i = 0; i < tab.size(); ++i)
			pool.push_back(i);
	}
	std::vector<int> sites;
	if (s.window_only)
		sites.assign(m.window().begin(), m.window().end());
	else
		for (int x = 0; x < m.n_sites(); ++x)
			sites.push_back(x);

	std::uniform_int_distribution<size_t> pick_sp(0, pool.size() - 1);
	std::uniform_int_distribution<size_t> pick_site(0, sites.size() - 1);
	std::uniform_int_distribution<int> pick_deg(s.allow_constant ? 0 : 1, s.max_degree);
	std::uniform_int_distribution<int> pick_terms(1, s.max_terms);
	std::uniform_int_distribution<int> num(-5, 5);
	std::uniform_int_distribution<int> den(1, 3);
	std::uniform_int_distribution<int> hb(0, s.hbar_max);
	std::uniform_int_distribution<int> coin(0, 1);

	Functional F(m.tabp(), trunc);
	int nterms = pick_terms(rng);
	for (int t = 0; t < nterms; ++t) {
		int d = pick_deg(rng);
		Monomial mo;
		int sign = 1, af = 0;
		for (int k = 0; k < d; ++k) {
			for (int tries = 0; tries < 8; ++tries) {
				int sp = pool[pick_sp(rng)];
				if (tab[sp].af && af >= s.max_af)
					continue;
				Monomial g;
				g.f.emplace_back(pack_gen(sites[pick_site(rng)], sp), 1);
				auto pr = mono_mul(mo, g, tab);
				if (!pr)
					continue;
				mo = pr->first;
				sign *= pr->second;
				af += tab[sp].af;
				break;
			}
		}
		Scalar c = Scalar::rational(num(rng), den(rng));
		if (s.complex_coeffs && coin(rng))
			c += Scalar(0, 1) * Scalar::rational(num(rng), den(rng));
		if (c.is_zero())
			c = Scalar(1);
		F.add_term(mo, HbarSeries::term(c * Scalar(sign), hb(rng), trunc));
	}
	return F;
}

/// a random vector field: af = 1 with kinetic antifield carriers
inline Functional random_vector_field(Model const &m, std::mt19937_64 &rng, int max_degree,
                                      int trunc, bool kinetic_sector_only = true)
{
	RandomSpec s;
	s.max_degree = std::max(0, max_degree - 1);
	s.max_af = 0;
	s.kinetic_sector_only = kinetic_sector_only;
	s.max_terms = 3;
	auto const &tab = m.species();
	std::vector<int> sites(m.window().begin(), m.window().end());
	std::uniform_int_distribution<size_t> pick_site(0, sites.size() - 1);
	std::uniform_int_distribution<size_t> pick_kin(0, tab.kinetic_ids().size() - 1);
	Functional X(m.tabp(), trunc);
	for (int t = 0; t < 2; ++t) {
		auto coeff = random_functional(m, rng, s, trunc);
		int a = tab.kinetic_ids()[pick_kin(rng)];
		auto af = Functional::generator(m.tabp(), trunc, pack_gen(sites[pick_site(rng)],
		                                                         tab[a].partner));
		X += coeff * af;
	}
	return X;
}

} // namespace bvlat
