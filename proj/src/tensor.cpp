#include "bvlat/tensor.hpp"

namespace bvlat {

int MultilocalTensor::max_rank() const
{
	int r = 0;
	for (auto const &[slots, c] : comp)
		r = std::max(r, int(slots.size()));
	return r;
}

MultilocalTensor beta_decompose(Functional const &F, int max_rank)
{
	MultilocalTensor T;
	T.tab = F.table();
	T.trunc = F.trunc();
	for (auto const &[mo, c] : F.terms()) {
		std::vector<Monomial> slots;
		for (auto const &[g, pw] : mo.f) {
			if (slots.empty() || gen_site(slots.back().f.back().first) != gen_site(g))
				slots.emplace_back();
			slots.back().f.emplace_back(g, pw);
		}
		if (int(slots.size()) > max_rank)
			throw domain_error("not multilocal of rank <= " + std::to_string(max_rank) +
			                   ": a term touches " + std::to_string(slots.size()) + " sites");
		auto [it, fresh] = T.comp.try_emplace(std::move(slots), c);
		if (!fresh)
			it->second += c;
	}
	return T;
}

Functional tensor_multiply(MultilocalTensor const &T)
{
	Functional out(T.tab, T.trunc);
	for (auto const &[slots, c] : T.comp) {
		// slots are site-ascending, so concatenation is already canonical
		Monomial mo;
		for (auto const &s : slots)
			mo.f.insert(mo.f.end(), s.f.begin(), s.f.end());
		out.add_term(mo, c);
	}
	return out;
}

} // namespace bvlat
