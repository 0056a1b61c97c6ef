#include "bvlat/contract.hpp"

namespace bvlat {

namespace {

using PairKey = std::pair<Monomial, Monomial>;

void add_to(std::map<PairKey, HbarSeries> &m, PairKey k, HbarSeries const &c)
{
	if (c.is_zero())
		return;
	auto [it, fresh] = m.try_emplace(std::move(k), c);
	if (!fresh) {
		it->second += c;
		if (it->second.is_zero())
			m.erase(it);
	}
}

} // namespace

Functional biproduct(Functional const &F, Functional const &G, Model const &m, Mat const &P,
                     HbarSeries const &u)
{
	if (F.trunc() != G.trunc())
		throw truncation_error("biproduct truncation mismatch");
	auto const &tab = m.species();
	Functional out(F.table(), F.trunc());

	std::map<PairKey, HbarSeries> cur;
	for (auto const &[a, ca] : F.terms())
		for (auto const &[b, cb] : G.terms())
			add_to(cur, {a, b}, ca * cb);

	auto emit = [&](std::map<PairKey, HbarSeries> const &layer) {
		for (auto const &[k, c] : layer) {
			auto pr = mono_mul(k.first, k.second, tab);
			if (!pr)
				continue;
			out.add_term(pr->first, pr->second < 0 ? -c : c);
		}
	};
	emit(cur);

	for (long step = 1; !cur.empty(); ++step) {
		std::map<PairKey, HbarSeries> next;
		for (auto const &[k, c] : cur) {
			for (int a : tab.kinetic_ids()) {
				for (auto const &[g, pg] : k.first.f) {
					if (gen_species(g) != a)
						continue;
					auto da = mono_derive_left(k.first, g, tab);
					for (auto const &[h, ph] : k.second.f) {
						if (gen_species(h) != a)
							continue;
						Scalar w = P.at(gen_site(g), gen_site(h));
						if (w.is_zero())
							continue;
						auto db = mono_derive_left(k.second, h, tab);
						w *= Scalar(da->second * db->second);
						w /= Scalar(step);
						add_to(next, {da->first, db->first}, (c * u).scaled(w));
					}
				}
			}
		}
		cur = std::move(next);
		emit(cur);
	}
	return out;
}

Functional op_exp(Functional const &F, Model const &m, Mat const &P, HbarSeries const &u)
{
	auto const &tab = m.species();
	Functional out(F.table(), F.trunc());

	std::map<Monomial, HbarSeries> cur(F.terms().begin(), F.terms().end());
	for (auto const &[mo, c] : cur)
		out.add_term(mo, c);

	Scalar half = Scalar::rational(1, 2);
	for (long step = 1; !cur.empty(); ++step) {
		std::map<Monomial, HbarSeries> next;
		for (auto const &[mo, c] : cur) {
			for (int a : tab.kinetic_ids()) {
				for (auto const &[g, pg] : mo.f) {
					if (gen_species(g) != a)
						continue;
					auto d1 = mono_derive_left(mo, g, tab);
					for (auto const &[h, ph] : d1->first.f) {
						if (gen_species(h) != a)
							continue;
						Scalar w = P.at(gen_site(g), gen_site(h));
						if (w.is_zero())
							continue;
						auto d2 = mono_derive_left(d1->first, h, tab);
						w *= half * Scalar(d1->second * d2->second);
						w /= Scalar(step);
						auto cc = (c * u).scaled(w);
						if (cc.is_zero())
							continue;
						auto [it, fresh] = next.try_emplace(d2->first, cc);
						if (!fresh) {
							it->second += cc;
							if (it->second.is_zero())
								next.erase(it);
						}
					}
				}
			}
		}
		cur = std::move(next);
		for (auto const &[mo, c] : cur)
			out.add_term(mo, c);
	}
	return out;
}

Functional vf_pairing(Functional const &Y, Functional const &F,
                      std::function<Functional(Functional const &, Functional const &)> const &prod,
                      SpeciesTable const &tab, std::vector<int> const &ids, int n_sites)
{
	Functional out(Y.table(), Y.trunc());
	auto [Yev, Yod] = Y.parity_parts();
	for (int pa = 0; pa < 2; ++pa) {
		Functional const &Yp = pa ? Yod : Yev;
		if (Yp.is_zero())
			continue;
		for (int a : ids) {
			if (tab[a].af)
				continue; // pairing runs over field species, af slot via partner
			int af_id = tab[a].partner;
			for (int x = 0; x < n_sites; ++x) {
				Functional dy = Yp.left_derivative(pack_gen(x, af_id));
				if (dy.is_zero())
					continue;
				Functional df = F.left_derivative(pack_gen(x, a));
				if (df.is_zero())
					continue;
				Functional term = prod(dy, df);
				int s = bracket_sign2(tab[a].odd, pa);
				out += (s < 0) ? -term : term;
			}
		}
	}
	return out;
}

} // namespace bvlat
