#include "bvlat/monomial.hpp"

namespace bvlat {

int mono_parity(Monomial const &m, SpeciesTable const &tab)
{
	int p = 0;
	for (auto &[g, pw] : m.f)
		if (tab[gen_species(g)].odd)
			p ^= (pw & 1);
	return p;
}

int mono_ghost(Monomial const &m, SpeciesTable const &tab)
{
	int gh = 0;
	for (auto &[g, pw] : m.f)
		gh += tab[gen_species(g)].ghost * int(pw);
	return gh;
}

int mono_afnum(Monomial const &m, SpeciesTable const &tab)
{
	int af = 0;
	for (auto &[g, pw] : m.f)
		af += tab[gen_species(g)].af * int(pw);
	return af;
}

std::set<int> mono_support(Monomial const &m)
{
	std::set<int> s;
	for (auto &[g, pw] : m.f)
		s.insert(gen_site(g));
	return s;
}

std::optional<std::pair<Monomial, int>> mono_mul(Monomial const &a, Monomial const &b,
                                                 SpeciesTable const &tab)
{
	// The product word is a followed by b; sorting it back to canonical
	// order transposes only (odd from b) past (odd from a with larger key).
	int odd_sign = 0;
	Monomial out;
	out.f.reserve(a.f.size() + b.f.size());
	size_t i = 0, j = 0;
	// suffix counts of odd factors in a, computed on the fly via total
	int odd_total_a = 0;
	for (auto &[g, pw] : a.f)
		if (tab[gen_species(g)].odd)
			++odd_total_a;
	int odd_seen_a = 0;
	while (i < a.f.size() || j < b.f.size()) {
		bool take_a;
		if (i == a.f.size())
			take_a = false;
		else if (j == b.f.size())
			take_a = true;
		else if (a.f[i].first == b.f[j].first) {
			auto const &sp = tab[gen_species(a.f[i].first)];
			if (sp.odd)
				return std::nullopt; // square of an odd generator
			out.f.emplace_back(a.f[i].first, a.f[i].second + b.f[j].second);
			++i;
			++j;
			continue;
		} else
			take_a = a.f[i].first < b.f[j].first;
		if (take_a) {
			if (tab[gen_species(a.f[i].first)].odd)
				++odd_seen_a;
			out.f.push_back(a.f[i]);
			++i;
		} else {
			if (tab[gen_species(b.f[j].first)].odd)
				odd_sign ^= ((odd_total_a - odd_seen_a) & 1);
			out.f.push_back(b.f[j]);
			++j;
		}
	}
	return std::make_pair(std::move(out), odd_sign ? -1 : 1);
}

std::optional<std::pair<Monomial, long>> mono_derive_left(Monomial const &m, Gen g,
                                                          SpeciesTable const &tab)
{
	bool odd = tab[gen_species(g)].odd;
	int odd_left = 0;
	for (size_t i = 0; i < m.f.size(); ++i) {
		auto [gi, pw] = m.f[i];
		if (gi == g) {
			Monomial out = m;
			if (pw > 1)
				out.f[i].second = pw - 1;
			else
				out.f.erase(out.f.begin() + long(i));
			long mult = odd ? ((odd_left & 1) ? -1 : 1) : long(pw);
			return std::make_pair(std::move(out), mult);
		}
		if (tab[gen_species(gi)].odd)
			odd_left += int(pw);
	}
	return std::nullopt;
}

int koszul_sign_of_permutation(std::vector<int> const &perm, std::vector<int> const &parity)
{
	int s = 0;
	for (size_t i = 0; i < perm.size(); ++i)
		for (size_t j = i + 1; j < perm.size(); ++j)
			if (perm[i] > perm[j] && parity[size_t(perm[i])] && parity[size_t(perm[j])])
				s ^= 1;
	return s ? -1 : 1;
}

std::string mono_str(Monomial const &m, SpeciesTable const &tab)
{
	if (m.is_one())
		return "1";
	std::string s;
	for (auto &[g, pw] : m.f) {
		if (!s.empty())
			s += "*";
		s += tab[gen_species(g)].name + "(" + std::to_string(gen_site(g)) + ")";
		if (pw > 1)
			s += "^" + std::to_string(pw);
	}
	return s;
}

} // namespace bvlat
