#include "bvlat/lagrangian.hpp"

namespace bvlat {

Functional Density::at_site(Model const &m, int x, int trunc) const
{
	Functional r(m.tabp(), trunc);
	for (auto const &[pows, coeff] : terms) {
		Monomial mo;
		Scalar c = coeff;
		bool dead = false;
		for (auto [sid, pw] : pows) {
			Monomial g;
			g.f.emplace_back(pack_gen(x, sid), pw);
			if (m.species()[sid].odd && pw > 1) {
				dead = true;
				break;
			}
			auto pr = mono_mul(mo, g, m.species());
			if (!pr) {
				dead = true;
				break;
			}
			mo = pr->first;
			c *= Scalar(pr->second);
		}
		if (!dead && !mo.is_one())
			r.add_term(mo, c);
	}
	return r;
}

static std::vector<Scalar> random_testvec(Model const &m, std::mt19937_64 &rng, bool sparse)
{
	std::uniform_int_distribution<int> num(-4, 4);
	std::uniform_int_distribution<int> keep(0, 2);
	std::vector<Scalar> f(size_t(m.n_sites()));
	for (auto &v : f) {
		if (sparse && keep(rng) == 0)
			continue;
		v = Scalar(num(rng));
	}
	return f;
}

Lagrangian make_lagrangian(Model const &m, int arity,
                           std::function<Functional(std::vector<std::vector<Scalar>> const &, int)> rule,
                           std::mt19937_64 &rng, int samples)
{
	Lagrangian L;
	L.arity = arity;
	L.rule = std::move(rule);
	int const trunc = 2;
	std::vector<Scalar> zero(size_t(m.n_sites()));
	for (int it = 0; it < samples; ++it) {
		// support axiom; the lattice reading of supp f is its stencil
		// closure, the discrete stand-in for the closed support that
		// makes discrete-derivative couplings local
		for (int slot = 0; slot < arity; ++slot) {
			std::vector<std::vector<Scalar>> args(size_t(arity), random_testvec(m, rng, true));
			auto F = L.rule(args, trunc);
			std::set<int> carrier;
			for (auto const &f : args)
				for (int x = 0; x < m.n_sites(); ++x)
					if (!f[size_t(x)].is_zero())
						carrier.insert(x);
			auto allowed = m.grow_by_stencil(carrier);
			for (int x : F.support())
				if (!allowed.count(x))
					throw model_error("lagrangian support axiom violated at site " +
					                  std::to_string(x));
		}
		// additivity L(f+g+h) = L(f+g) - L(g) + L(g+h) with supp f cap supp h empty
		if (arity == 1) {
			std::vector<Scalar> f(size_t(m.n_sites())), g = random_testvec(m, rng, true),
			    h(size_t(m.n_sites()));
			std::uniform_int_distribution<int> num(-4, 4);
			std::uniform_int_distribution<int> cut(0, m.n_sites() - 1);
			int c = cut(rng);
			for (int x = 0; x < m.n_sites(); ++x)
				(x <= c ? f : h)[size_t(x)] = Scalar(num(rng));
			auto add = [&](std::vector<Scalar> a, std::vector<Scalar> const &b) {
				for (size_t k = 0; k < a.size(); ++k)
					a[k] += b[k];
				return a;
			};
			auto lhs = L.rule({add(add(f, g), h)}, trunc);
			auto rhs = L.rule({add(f, g)}, trunc) - L.rule({g}, trunc) + L.rule({add(g, h)}, trunc);
			if (!(lhs == rhs))
				throw model_error("lagrangian additivity violated");
		}
	}
	// support axiom at zero
	std::vector<std::vector<Scalar>> zargs(size_t(arity), zero);
	if (!L.rule(zargs, trunc).is_zero())
		throw model_error("lagrangian support axiom violated: L(0) != 0");
	return L;
}

Lagrangian free_lagrangian(Model const &m, std::mt19937_64 &rng)
{
	auto rule = [&m](std::vector<std::vector<Scalar>> const &fs, int trunc) {
		return m.free_action(fs.at(0), trunc);
	};
	return make_lagrangian(m, 1, rule, rng);
}

Lagrangian density_lagrangian(Model const &m, Density d, std::mt19937_64 &rng)
{
	auto rule = [&m, d = std::move(d)](std::vector<std::vector<Scalar>> const &fs, int trunc) {
		Functional r(m.tabp(), trunc);
		for (int x = 0; x < m.n_sites(); ++x) {
			Scalar w = fs.at(0)[size_t(x)];
			if (w.is_zero())
				continue;
			r += d.at_site(m, x, trunc).scaled(w);
		}
		return r;
	};
	return make_lagrangian(m, 1, rule, rng);
}

Functional lagrangian_apply(Lagrangian const &L, std::vector<Scalar> const &f, int trunc)
{
	return L({f}, trunc);
}

std::optional<std::vector<Scalar>> lagrangian_equiv(Lagrangian const &L1, Lagrangian const &L2,
                                                    Model const &m, std::mt19937_64 &rng,
                                                    int samples, int trunc)
{
	if (L1.arity != L2.arity)
		throw domain_error("lagrangian_equiv: arity mismatch");
	for (int it = 0; it < samples; ++it) {
		std::vector<std::vector<Scalar>> args;
		std::set<int> allowed;
		for (int k = 0; k < L1.arity; ++k) {
			// plateaus: level sets wide enough that interior sites exist
			std::uniform_int_distribution<int> num(-3, 3);
			std::uniform_int_distribution<int> cut(1, std::max(1, m.n_sites() - 1));
			int c = cut(rng);
			Scalar lo{num(rng)}, hi{num(rng)};
			std::vector<Scalar> f(size_t(m.n_sites()));
			for (int x = 0; x < m.n_sites(); ++x)
				f[size_t(x)] = (x < c) ? lo : hi;
			auto ds = m.d_support(f);
			allowed.insert(ds.begin(), ds.end());
			args.push_back(std::move(f));
		}
		auto diff = L1.rule(args, trunc) - L2.rule(args, trunc);
		for (int x : diff.support())
			if (!allowed.count(x))
				return args.at(0);
	}
	return std::nullopt;
}

} // namespace bvlat
