#pragma once

#include <vector>

#include "bvlat/scalar.hpp"

namespace bvlat {

/// Polynomial in hbar truncated at a fixed order N: powers above N are
/// discarded by every operation. Negative powers can appear in intermediate
/// normal forms (the 1/hbar weights of interaction exponentials); anything
/// stored in a public Functional must satisfy regular(), i.e. min power >= 0.
class HbarSeries {
  public:
	HbarSeries() : trunc_(0), min_(0) {}
	explicit HbarSeries(int trunc) : trunc_(trunc), min_(0) {}

	static HbarSeries zero(int trunc) { return HbarSeries(trunc); }
	static HbarSeries term(Scalar c, int power, int trunc);
	static HbarSeries constant(Scalar c, int trunc) { return term(std::move(c), 0, trunc); }
	static HbarSeries one(int trunc) { return constant(Scalar(1), trunc); }

	int trunc() const { return trunc_; }
	bool is_zero() const { return c_.empty(); }
	bool regular() const { return c_.empty() || min_ >= 0; }
	int min_power() const; // throws on zero
	int max_power() const;
	Scalar coeff(int power) const;

	HbarSeries operator-() const;
	HbarSeries &operator+=(HbarSeries const &o);
	HbarSeries &operator-=(HbarSeries const &o);
	friend HbarSeries operator+(HbarSeries a, HbarSeries const &b) { return a += b; }
	friend HbarSeries operator-(HbarSeries a, HbarSeries const &b) { return a -= b; }
	friend HbarSeries operator*(HbarSeries const &a, HbarSeries const &b);
	friend bool operator==(HbarSeries const &a, HbarSeries const &b)
	{
		return a.min_ == b.min_ && a.c_ == b.c_;
	}

	HbarSeries scaled(Scalar const &s) const;
	/// multiply by hbar^k (k may be negative); powers above trunc are dropped
	HbarSeries shifted(int k) const;
	HbarSeries conj() const; // hbar is a real parameter

	/// exp of a series with vanishing coefficients below hbar^1
	HbarSeries exp() const;
	/// inverse of a series with invertible constant term and min power 0
	HbarSeries inverse() const;

	/// reinterpret at truncation N; powers above N are dropped. Raising the
	/// truncation treats the stored data as an exact polynomial.
	HbarSeries at_trunc(int N) const;

	std::string str() const;

  private:
	int trunc_;
	int min_;
	std::vector<Scalar> c_; // c_[k] is the coefficient of hbar^(min_+k)
	void normalize();
	friend class Functional;
};

} // namespace bvlat
