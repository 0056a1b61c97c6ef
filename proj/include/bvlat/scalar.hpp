#pragma once

#include <gmpxx.h>

#include <string>

#include "bvlat/errors.hpp"

namespace bvlat {

/// Gaussian rational a + b*i with exact arithmetic. The whole engine runs on
/// this type; no floating point representation exists anywhere.
struct Scalar {
	mpq_class re, im;

	Scalar() : re(0), im(0) {}
	Scalar(long a) : re(a), im(0) {}
	Scalar(mpq_class a) : re(std::move(a)), im(0) {}
	Scalar(mpq_class a, mpq_class b) : re(std::move(a)), im(std::move(b)) {}
	Scalar(long a, long b) : re(a), im(b) {}

	static Scalar i() { return Scalar(0, 1); }
	static Scalar rational(long p, long q)
	{
		if (q == 0)
			throw domain_error("rational with zero denominator");
		mpq_class r(p, q);
		r.canonicalize();
		return Scalar(r);
	}

	bool is_zero() const { return re == 0 && im == 0; }
	bool is_real() const { return im == 0; }

	Scalar conj() const { return Scalar(re, -im); }

	Scalar operator-() const { return Scalar(-re, -im); }
	Scalar &operator+=(Scalar const &o)
	{
		re += o.re;
		im += o.im;
		return *this;
	}
	Scalar &operator-=(Scalar const &o)
	{
		re -= o.re;
		im -= o.im;
		return *this;
	}
	Scalar &operator*=(Scalar const &o)
	{
		mpq_class r = re * o.re - im * o.im;
		mpq_class i = re * o.im + im * o.re;
		re = std::move(r);
		im = std::move(i);
		return *this;
	}
	Scalar &operator/=(Scalar const &o)
	{
		if (o.is_zero())
			throw domain_error("division by zero scalar");
		mpq_class n = o.re * o.re + o.im * o.im;
		mpq_class r = (re * o.re + im * o.im) / n;
		mpq_class i = (im * o.re - re * o.im) / n;
		re = std::move(r);
		im = std::move(i);
		return *this;
	}

	friend Scalar operator+(Scalar a, Scalar const &b) { return a += b; }
	friend Scalar operator-(Scalar a, Scalar const &b) { return a -= b; }
	friend Scalar operator*(Scalar a, Scalar const &b) { return a *= b; }
	friend Scalar operator/(Scalar a, Scalar const &b) { return a /= b; }
	friend bool operator==(Scalar const &a, Scalar const &b)
	{
		return a.re == b.re && a.im == b.im;
	}
	friend bool operator!=(Scalar const &a, Scalar const &b) { return !(a == b); }

	std::string str() const;
};

/// Parses "p/q", "p", with an optional "i"-part written as "a+b*i" handled by
/// the JSON layer; this one accepts a plain rational literal.
Scalar parse_rational(std::string const &s);

} // namespace bvlat
