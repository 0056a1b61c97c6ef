#include "bvlat/functional.hpp"

namespace bvlat {

Functional Functional::constant(SpeciesTable const *tab, int trunc, Scalar c)
{
	Functional r(tab, trunc);
	r.add_term(Monomial{}, std::move(c));
	return r;
}

Functional Functional::generator(SpeciesTable const *tab, int trunc, Gen g)
{
	Functional r(tab, trunc);
	Monomial m;
	m.f.emplace_back(g, 1);
	r.add_term(m, Scalar(1));
	return r;
}

void Functional::check_compat(Functional const &o) const
{
	if (trunc_ != o.trunc_)
		throw truncation_error("functional truncation mismatch");
	if (tab_ != o.tab_ && !(tab_ && o.tab_ && *tab_ == *o.tab_))
		throw grading_error("functionals over different species tables");
}

void Functional::add_term(Monomial const &m, HbarSeries const &c)
{
	if (c.trunc() != trunc_)
		throw truncation_error("coefficient truncation mismatch");
	if (c.is_zero())
		return;
	auto [it, fresh] = t_.try_emplace(m, c);
	if (!fresh) {
		it->second += c;
		if (it->second.is_zero())
			t_.erase(it);
	}
}

void Functional::add_term(Monomial const &m, Scalar c, int hbar_power)
{
	add_term(m, HbarSeries::term(std::move(c), hbar_power, trunc_));
}

Functional Functional::operator-() const
{
	Functional r = *this;
	for (auto &[m, c] : r.t_)
		c = -c;
	return r;
}

Functional &Functional::operator+=(Functional const &o)
{
	check_compat(o);
	for (auto const &[m, c] : o.t_)
		add_term(m, c);
	return *this;
}

Functional &Functional::operator-=(Functional const &o)
{
	check_compat(o);
	for (auto const &[m, c] : o.t_)
		add_term(m, -c);
	return *this;
}

bool operator==(Functional const &a, Functional const &b)
{
	a.check_compat(b);
	return a.t_ == b.t_;
}

Functional Functional::scaled(Scalar const &s) const
{
	Functional r(tab_, trunc_);
	if (s.is_zero())
		return r;
	for (auto const &[m, c] : t_)
		r.add_term(m, c.scaled(s));
	return r;
}

Functional Functional::scaled(HbarSeries const &s) const
{
	Functional r(tab_, trunc_);
	for (auto const &[m, c] : t_)
		r.add_term(m, c * s);
	return r;
}

Functional Functional::shifted_hbar(int k) const
{
	Functional r(tab_, trunc_);
	for (auto const &[m, c] : t_)
		r.add_term(m, c.shifted(k));
	return r;
}

Functional operator*(Functional const &a, Functional const &b)
{
	a.check_compat(b);
	Functional r(a.tab_, a.trunc_);
	for (auto const &[u, cu] : a.t_) {
		for (auto const &[v, cv] : b.t_) {
			auto prod = mono_mul(u, v, *a.tab_);
			if (!prod)
				continue;
			HbarSeries c = cu * cv;
			if (prod->second < 0)
				c = -c;
			r.add_term(prod->first, c);
		}
	}
	return r;
}

Functional Functional::left_derivative(Gen g) const
{
	Functional r(tab_, trunc_);
	for (auto const &[m, c] : t_) {
		auto d = mono_derive_left(m, g, *tab_);
		if (!d)
			continue;
		r.add_term(d->first, c.scaled(Scalar(d->second)));
	}
	return r;
}

std::set<int> Functional::support() const
{
	std::set<int> s;
	for (auto const &[m, c] : t_)
		for (auto &[g, p] : m.f)
			s.insert(gen_site(g));
	return s;
}

std::set<int> Functional::af_support() const
{
	std::set<int> s;
	for (auto const &[m, c] : t_)
		for (auto &[g, p] : m.f)
			if ((*tab_)[gen_species(g)].af)
				s.insert(gen_site(g));
	return s;
}

std::optional<int> Functional::parity() const
{
	std::optional<int> p;
	for (auto const &[m, c] : t_) {
		int q = mono_parity(m, *tab_);
		if (p && *p != q)
			return std::nullopt;
		p = q;
	}
	return t_.empty() ? std::optional<int>(0) : p;
}

std::optional<int> Functional::ghost() const
{
	std::optional<int> p;
	for (auto const &[m, c] : t_) {
		int q = mono_ghost(m, *tab_);
		if (p && *p != q)
			return std::nullopt;
		p = q;
	}
	return t_.empty() ? std::optional<int>(0) : p;
}

std::optional<int> Functional::afnum() const
{
	std::optional<int> p;
	for (auto const &[m, c] : t_) {
		int q = mono_afnum(m, *tab_);
		if (p && *p != q)
			return std::nullopt;
		p = q;
	}
	return t_.empty() ? std::optional<int>(0) : p;
}

int Functional::max_afnum() const
{
	int a = 0;
	for (auto const &[m, c] : t_)
		a = std::max(a, mono_afnum(m, *tab_));
	return a;
}

std::pair<Functional, Functional> Functional::parity_parts() const
{
	Functional ev(tab_, trunc_), od(tab_, trunc_);
	for (auto const &[m, c] : t_)
		(mono_parity(m, *tab_) ? od : ev).add_term(m, c);
	return {ev, od};
}

Functional Functional::af_part(int k) const
{
	Functional r(tab_, trunc_);
	for (auto const &[m, c] : t_)
		if (mono_afnum(m, *tab_) == k)
			r.add_term(m, c);
	return r;
}

HbarSeries Functional::evaluate(std::map<Gen, Scalar> const &config) const
{
	HbarSeries acc(trunc_);
	for (auto const &[m, c] : t_) {
		Scalar v(1);
		bool dead = false;
		for (auto &[g, pw] : m.f) {
			if ((*tab_)[gen_species(g)].odd) {
				dead = true;
				break;
			}
			auto it = config.find(g);
			if (it == config.end())
				throw domain_error("evaluate: unassigned generator " +
				                   (*tab_)[gen_species(g)].name + "(" +
				                   std::to_string(gen_site(g)) + ")");
			for (uint32_t k = 0; k < pw; ++k)
				v *= it->second;
		}
		if (!dead)
			acc += c.scaled(v);
	}
	return acc;
}

Functional Functional::conjugate() const
{
	Functional r(tab_, trunc_);
	for (auto const &[m, c] : t_) {
		int n_odd = 0;
		for (auto &[g, pw] : m.f)
			if ((*tab_)[gen_species(g)].odd)
				n_odd += int(pw);
		// reversing the odd word costs (-1)^{k(k-1)/2}
		bool flip = ((n_odd * (n_odd - 1) / 2) % 2) != 0;
		HbarSeries cc = c.conj();
		r.add_term(m, flip ? -cc : cc);
	}
	return r;
}

bool Functional::hbar_regular() const
{
	for (auto const &[m, c] : t_)
		if (!c.regular())
			return false;
	return true;
}

std::optional<int> Functional::min_hbar_power() const
{
	std::optional<int> p;
	for (auto const &[m, c] : t_)
		if (!c.is_zero())
			p = p ? std::min(*p, c.min_power()) : c.min_power();
	return p;
}

Functional Functional::at_trunc(int N) const
{
	Functional r(tab_, N);
	for (auto const &[m, c] : t_) {
		auto cc = c.at_trunc(N);
		if (!cc.is_zero())
			r.add_term(m, cc);
	}
	return r;
}

std::string Functional::str() const
{
	if (t_.empty())
		return "0";
	std::string s;
	for (auto const &[m, c] : t_) {
		if (!s.empty())
			s += "  +  ";
		s += "[" + c.str() + "]";
		if (!m.is_one())
			s += " " + mono_str(m, *tab_);
	}
	return s;
}

} // namespace bvlat
