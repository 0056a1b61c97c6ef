#pragma once

#include <vector>

#include "bvlat/scalar.hpp"

namespace bvlat {

/// Dense square matrix over Gaussian rationals; big enough for desk-scale
/// lattices, exact everywhere.
struct Mat {
	int n = 0;
	std::vector<Scalar> a;

	Mat() = default;
	explicit Mat(int n_) : n(n_), a(size_t(n_) * size_t(n_)) {}

	Scalar &at(int i, int j) { return a[size_t(i) * size_t(n) + size_t(j)]; }
	Scalar const &at(int i, int j) const { return a[size_t(i) * size_t(n) + size_t(j)]; }

	static Mat eye(int n)
	{
		Mat m(n);
		for (int i = 0; i < n; ++i)
			m.at(i, i) = Scalar(1);
		return m;
	}

	Mat transpose() const
	{
		Mat m(n);
		for (int i = 0; i < n; ++i)
			for (int j = 0; j < n; ++j)
				m.at(j, i) = at(i, j);
		return m;
	}

	bool symmetric() const
	{
		for (int i = 0; i < n; ++i)
			for (int j = i + 1; j < n; ++j)
				if (at(i, j) != at(j, i))
					return false;
		return true;
	}

	friend Mat operator*(Mat const &x, Mat const &y)
	{
		Mat m(x.n);
		for (int i = 0; i < x.n; ++i)
			for (int k = 0; k < x.n; ++k) {
				if (x.at(i, k).is_zero())
					continue;
				for (int j = 0; j < x.n; ++j)
					m.at(i, j) += x.at(i, k) * y.at(k, j);
			}
		return m;
	}
	friend Mat operator+(Mat const &x, Mat const &y)
	{
		Mat m(x.n);
		for (size_t k = 0; k < x.a.size(); ++k)
			m.a[k] = x.a[k] + y.a[k];
		return m;
	}
	friend Mat operator-(Mat const &x, Mat const &y)
	{
		Mat m(x.n);
		for (size_t k = 0; k < x.a.size(); ++k)
			m.a[k] = x.a[k] - y.a[k];
		return m;
	}
	Mat scaled(Scalar const &s) const
	{
		Mat m(n);
		for (size_t k = 0; k < a.size(); ++k)
			m.a[k] = a[k] * s;
		return m;
	}
	friend bool operator==(Mat const &x, Mat const &y) { return x.n == y.n && x.a == y.a; }
};

} // namespace bvlat
