#pragma once

#include <map>
#include <optional>

#include "bvlat/hbar_series.hpp"
#include "bvlat/monomial.hpp"

namespace bvlat {

/// Graded polynomial in the generators with truncated hbar-series
/// coefficients: the carrier for observables, vector fields, actions and
/// S-matrices. Sparse canonical form: zero coefficients are never stored and
/// every coefficient shares the declared truncation order.
class Functional {
  public:
	Functional() : tab_(nullptr), trunc_(0) {}
	Functional(SpeciesTable const *tab, int trunc) : tab_(tab), trunc_(trunc) {}

	static Functional zero(SpeciesTable const *tab, int trunc) { return {tab, trunc}; }
	static Functional constant(SpeciesTable const *tab, int trunc, Scalar c);
	static Functional one(SpeciesTable const *tab, int trunc)
	{
		return constant(tab, trunc, Scalar(1));
	}
	static Functional generator(SpeciesTable const *tab, int trunc, Gen g);

	SpeciesTable const *table() const { return tab_; }
	int trunc() const { return trunc_; }
	bool is_zero() const { return t_.empty(); }
	size_t n_terms() const { return t_.size(); }
	std::map<Monomial, HbarSeries> const &terms() const { return t_; }

	void add_term(Monomial const &m, HbarSeries const &c);
	void add_term(Monomial const &m, Scalar c, int hbar_power = 0);

	Functional operator-() const;
	Functional &operator+=(Functional const &o);
	Functional &operator-=(Functional const &o);
	friend Functional operator+(Functional a, Functional const &b) { return a += b; }
	friend Functional operator-(Functional a, Functional const &b) { return a -= b; }
	friend bool operator==(Functional const &a, Functional const &b);

	Functional scaled(Scalar const &s) const;
	Functional scaled(HbarSeries const &s) const;
	Functional shifted_hbar(int k) const;

	/// graded-commutative pointwise product, m(F (x) G)
	friend Functional operator*(Functional const &a, Functional const &b);

	/// formal left partial derivative with Koszul signs
	Functional left_derivative(Gen g) const;

	std::set<int> support() const;
	/// sites where antifield generators occur
	std::set<int> af_support() const;

	/// exact parity/#gh/#af of a homogeneous functional, nothing otherwise
	std::optional<int> parity() const;
	std::optional<int> ghost() const;
	std::optional<int> afnum() const;
	int max_afnum() const;
	/// split into even and odd parts
	std::pair<Functional, Functional> parity_parts() const;
	/// the part with antifield number exactly k
	Functional af_part(int k) const;

	/// substitutes Scalar values for even generators; monomials containing
	/// odd generators evaluate to zero. Throws on unassigned generators.
	HbarSeries evaluate(std::map<Gen, Scalar> const &config) const;

	/// F*(phi) = conj(F(phi)): conjugates coefficients and reverses odd
	/// factor order (a sign per monomial)
	Functional conjugate() const;

	/// true when every coefficient has hbar powers >= 0; public results must
	/// satisfy this, intermediate normal forms need not
	bool hbar_regular() const;
	/// lowest hbar power appearing anywhere, nothing when zero
	std::optional<int> min_hbar_power() const;

	/// reinterpret at truncation N (see HbarSeries::at_trunc)
	Functional at_trunc(int N) const;

	std::string str() const;

  private:
	SpeciesTable const *tab_;
	int trunc_;
	std::map<Monomial, HbarSeries> t_;
	void check_compat(Functional const &o) const;
};

} // namespace bvlat
