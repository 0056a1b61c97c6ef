#include "bvlat/scalar.hpp"

#include "bvlat/hbar_series.hpp"

namespace bvlat {

std::string Scalar::str() const
{
	if (im == 0)
		return re.get_str();
	std::string s;
	if (re != 0) {
		s += re.get_str();
		s += (im > 0) ? "+" : "-";
	} else if (im < 0)
		s += "-";
	mpq_class a = abs(im);
	if (a != 1) {
		s += a.get_str();
		s += "*";
	}
	s += "i";
	return s;
}

Scalar parse_rational(std::string const &s)
{
	if (s.empty())
		throw load_error("empty rational literal");
	mpq_class q;
	if (q.set_str(s, 10) != 0)
		throw load_error("bad rational literal: " + s);
	q.canonicalize();
	return Scalar(q);
}

HbarSeries HbarSeries::term(Scalar c, int power, int trunc)
{
	HbarSeries r(trunc);
	if (c.is_zero() || power > trunc)
		return r;
	r.min_ = power;
	r.c_.push_back(std::move(c));
	return r;
}

void HbarSeries::normalize()
{
	size_t lead = 0;
	while (lead < c_.size() && c_[lead].is_zero())
		++lead;
	if (lead > 0) {
		c_.erase(c_.begin(), c_.begin() + lead);
		min_ += int(lead);
	}
	while (!c_.empty() && c_.back().is_zero())
		c_.pop_back();
	if (c_.empty())
		min_ = 0;
}

int HbarSeries::min_power() const
{
	if (c_.empty())
		throw domain_error("min_power of zero series");
	return min_;
}

int HbarSeries::max_power() const
{
	if (c_.empty())
		throw domain_error("max_power of zero series");
	return min_ + int(c_.size()) - 1;
}

Scalar HbarSeries::coeff(int power) const
{
	if (power < min_ || power >= min_ + int(c_.size()))
		return Scalar(0);
	return c_[power - min_];
}

HbarSeries HbarSeries::operator-() const
{
	HbarSeries r = *this;
	for (auto &x : r.c_)
		x = -x;
	return r;
}

HbarSeries &HbarSeries::operator+=(HbarSeries const &o)
{
	if (trunc_ != o.trunc_)
		throw truncation_error("hbar truncation mismatch");
	if (o.c_.empty())
		return *this;
	if (c_.empty()) {
		*this = o;
		return *this;
	}
	int lo = std::min(min_, o.min_);
	int hi = std::max(min_ + int(c_.size()), o.min_ + int(o.c_.size()));
	std::vector<Scalar> out(size_t(hi - lo));
	for (size_t k = 0; k < c_.size(); ++k)
		out[size_t(min_ - lo) + k] += c_[k];
	for (size_t k = 0; k < o.c_.size(); ++k)
		out[size_t(o.min_ - lo) + k] += o.c_[k];
	min_ = lo;
	c_ = std::move(out);
	normalize();
	return *this;
}

HbarSeries &HbarSeries::operator-=(HbarSeries const &o) { return *this += -o; }

HbarSeries operator*(HbarSeries const &a, HbarSeries const &b)
{
	if (a.trunc_ != b.trunc_)
		throw truncation_error("hbar truncation mismatch");
	HbarSeries r(a.trunc_);
	if (a.c_.empty() || b.c_.empty())
		return r;
	r.min_ = a.min_ + b.min_;
	int width = a.trunc_ - r.min_ + 1;
	if (width <= 0)
		return HbarSeries(a.trunc_);
	width = std::min<int>(width, int(a.c_.size() + b.c_.size()) - 1);
	r.c_.assign(size_t(width), Scalar(0));
	for (size_t p = 0; p < a.c_.size(); ++p) {
		if (a.c_[p].is_zero())
			continue;
		for (size_t q = 0; q < b.c_.size() && int(p + q) < width; ++q)
			r.c_[p + q] += a.c_[p] * b.c_[q];
	}
	r.normalize();
	return r;
}

HbarSeries HbarSeries::scaled(Scalar const &s) const
{
	HbarSeries r = *this;
	if (s.is_zero())
		return HbarSeries(trunc_);
	for (auto &x : r.c_)
		x *= s;
	r.normalize();
	return r;
}

HbarSeries HbarSeries::shifted(int k) const
{
	HbarSeries r = *this;
	if (r.c_.empty())
		return r;
	r.min_ += k;
	while (!r.c_.empty() && r.min_ + int(r.c_.size()) - 1 > trunc_)
		r.c_.pop_back();
	r.normalize();
	return r;
}

HbarSeries HbarSeries::conj() const
{
	HbarSeries r = *this;
	for (auto &x : r.c_)
		x = x.conj();
	return r;
}

HbarSeries HbarSeries::exp() const
{
	if (!c_.empty() && min_ < 1)
		throw domain_error("exp needs vanishing constant term");
	HbarSeries acc = one(trunc_);
	HbarSeries p = one(trunc_);
	mpq_class fact(1);
	for (int k = 1; k <= trunc_; ++k) {
		p = p * (*this);
		if (p.is_zero())
			break;
		fact *= k;
		acc += p.scaled(Scalar(mpq_class(1) / fact));
	}
	return acc;
}

HbarSeries HbarSeries::inverse() const
{
	if (c_.empty() || min_ != 0)
		throw domain_error("inverse needs an invertible constant term");
	Scalar c0 = c_[0];
	// u = series/c0 - 1 has min power >= 1; sum the geometric series
	HbarSeries u = scaled(Scalar(1) / c0) - one(trunc_);
	HbarSeries acc = one(trunc_);
	HbarSeries p = one(trunc_);
	for (int k = 1; k <= trunc_; ++k) {
		p = p * u;
		if (p.is_zero())
			break;
		acc += (k % 2 ? -p : p);
	}
	return acc.scaled(Scalar(1) / c0);
}

HbarSeries HbarSeries::at_trunc(int N) const
{
	HbarSeries r = *this;
	r.trunc_ = N;
	while (!r.c_.empty() && r.min_ + int(r.c_.size()) - 1 > N)
		r.c_.pop_back();
	r.normalize();
	return r;
}

std::string HbarSeries::str() const
{
	if (c_.empty())
		return "0";
	std::string s;
	for (size_t k = 0; k < c_.size(); ++k) {
		if (c_[k].is_zero())
			continue;
		if (!s.empty())
			s += " + ";
		int pw = min_ + int(k);
		s += "(" + c_[k].str() + ")";
		if (pw != 0)
			s += "*hb^" + std::to_string(pw);
	}
	return s;
}

} // namespace bvlat
