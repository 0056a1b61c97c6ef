#include "bvlat/model.hpp"

#include <algorithm>

namespace bvlat {

static std::vector<int> positions(int n, std::vector<int> const &order)
{
	std::vector<int> ord = order;
	if (ord.empty()) {
		ord.resize(size_t(n));
		for (int i = 0; i < n; ++i)
			ord[size_t(i)] = i;
	}
	if (int(ord.size()) != n)
		throw model_error("time order must list every site once");
	std::vector<int> pos(size_t(n), -1);
	for (int p = 0; p < n; ++p) {
		int s = ord[size_t(p)];
		if (s < 0 || s >= n || pos[size_t(s)] != -1)
			throw model_error("time order is not a permutation of the sites");
		pos[size_t(s)] = p;
	}
	return pos;
}

Mat retarded_green(Mat const &K, std::vector<int> const &time_order)
{
	int n = K.n;
	auto pos = positions(n, time_order);
	std::vector<int> by_pos(static_cast<size_t>(n));
	for (int s = 0; s < n; ++s)
		by_pos[size_t(pos[size_t(s)])] = s;
	if (!K.symmetric())
		throw model_error("asymmetric K");
	bool off_diag = false;
	for (int t = 0; t < n; ++t)
		for (int s = 0; s < n; ++s) {
			if (std::abs(pos[size_t(t)] - pos[size_t(s)]) > 1 && !K.at(t, s).is_zero())
				throw model_error("K reaches beyond one step in the time order");
			if (t != s && !K.at(t, s).is_zero())
				off_diag = true;
		}

	Mat DR(n);
	if (!off_diag) {
		for (int t = 0; t < n; ++t) {
			if (K.at(t, t).is_zero())
				throw model_error("K not forward-solvable: zero diagonal at site " +
				                  std::to_string(t));
			DR.at(t, t) = Scalar(1) / K.at(t, t);
		}
		return DR;
	}
	// second-difference style: retarded data vanish at and before the source
	for (int p = 0; p + 1 < n; ++p) {
		int t = by_pos[size_t(p)];
		int tn = by_pos[size_t(p + 1)];
		if (K.at(t, tn).is_zero())
			throw model_error("K not forward-solvable: zero forward coupling at site " +
			                  std::to_string(t));
	}
	for (int s = 0; s < n; ++s) {
		for (int p = pos[size_t(s)]; p + 1 < n; ++p) {
			int t = by_pos[size_t(p)];
			int tn = by_pos[size_t(p + 1)];
			Scalar acc = (t == s) ? Scalar(1) : Scalar(0);
			if (p > 0) {
				int tp = by_pos[size_t(p - 1)];
				acc -= K.at(t, tp) * DR.at(tp, s);
			}
			acc -= K.at(t, t) * DR.at(t, s);
			DR.at(tn, s) = acc / K.at(t, tn);
		}
	}
	return DR;
}

Model build_model(ModelSpec const &spec)
{
	Model m;
	if (spec.n_sites <= 0 || spec.n_sites > 4096)
		throw model_error("bad site count");
	m.n_ = spec.n_sites;
	m.pos_ = positions(m.n_, spec.time_order);
	for (int w : spec.window) {
		if (w < 0 || w >= m.n_)
			throw model_error("window site out of range");
		m.W_.insert(w);
	}
	m.tab_ = SpeciesTable(spec.species);
	if (m.tab_.kinetic_ids().empty())
		throw model_error("model needs at least one kinetic species");

	if (spec.K.n != m.n_)
		throw model_error("K has the wrong dimension");
	if (!spec.K.symmetric())
		throw model_error("asymmetric K");
	m.K_ = spec.K;

	if (spec.delta_R) {
		if (spec.delta_R->n != m.n_)
			throw model_error("Delta_R has the wrong dimension");
		m.DR_ = *spec.delta_R;
		for (int t = 0; t < m.n_; ++t)
			for (int s = 0; s < m.n_; ++s)
				if (m.pos_[size_t(t)] < m.pos_[size_t(s)] && !m.DR_.at(t, s).is_zero())
					throw model_error("Delta_R support violation at (" + std::to_string(t) +
					                  "," + std::to_string(s) + ")");
	} else {
		std::vector<int> ord(size_t(m.n_));
		for (int i = 0; i < m.n_; ++i)
			ord[size_t(i)] = i;
		std::vector<int> inv(size_t(m.n_));
		for (int s = 0; s < m.n_; ++s)
			inv[size_t(m.pos_[size_t(s)])] = s;
		m.DR_ = retarded_green(m.K_, inv);
	}

	Mat KDR = m.K_ * m.DR_;
	for (int t : m.W_)
		for (int s = 0; s < m.n_; ++s)
			if (KDR.at(t, s) != (t == s ? Scalar(1) : Scalar(0)))
				throw model_error("green identity failure on window row " + std::to_string(t));

	m.DA_ = m.DR_.transpose();
	m.D_ = m.DR_ - m.DA_;
	m.DD_ = (m.DR_ + m.DA_).scaled(Scalar::rational(1, 2));
	m.H_ = spec.H ? *spec.H : Mat(m.n_);
	if (m.H_.n != m.n_)
		throw model_error("H has the wrong dimension");
	if (!m.H_.symmetric())
		throw model_error("H must be symmetric");
	m.HF_ = m.H_ + m.DD_.scaled(Scalar::i());

	// prerequisites for the windowed Schwinger-Dyson identities
	Mat DDK = m.DD_ * m.K_;
	Mat DK = m.D_ * m.K_;
	for (int x = 0; x < m.n_; ++x)
		for (int z : m.W_) {
			if (DDK.at(x, z) != (x == z ? Scalar(1) : Scalar(0)))
				throw model_error("Dirac propagator misses the window identity at column " +
				                  std::to_string(z));
			if (!DK.at(x, z).is_zero())
				throw model_error("causal propagator misses the window identity at column " +
				                  std::to_string(z));
		}
	return m;
}

std::set<int> Model::stencil(int x) const
{
	std::set<int> s{x};
	for (int y = 0; y < n_; ++y)
		if (!K_.at(x, y).is_zero())
			s.insert(y);
	return s;
}

std::set<int> Model::grow_by_stencil(std::set<int> const &in) const
{
	std::set<int> out;
	for (int x : in) {
		auto st = stencil(x);
		out.insert(st.begin(), st.end());
	}
	return out;
}

std::set<int> Model::d_support(std::vector<Scalar> const &f) const
{
	std::set<int> s;
	for (int x = 0; x < n_; ++x)
		for (int y = 0; y < n_; ++y)
			if (y != x && !K_.at(x, y).is_zero() && f[size_t(x)] != f[size_t(y)]) {
				s.insert(x);
				break;
			}
	return s;
}

Functional Model::eom(int kinetic_sid, int x, int trunc) const
{
	Functional r(&tab_, trunc);
	for (int s = 0; s < n_; ++s) {
		if (K_.at(x, s).is_zero())
			continue;
		Monomial mo;
		mo.f.emplace_back(pack_gen(s, kinetic_sid), 1);
		r.add_term(mo, K_.at(x, s));
	}
	return r;
}

Functional Model::free_action(std::vector<Scalar> const &f, int trunc) const
{
	Functional r(&tab_, trunc);
	Scalar half = Scalar::rational(1, 2);
	for (int a : tab_.kinetic_ids())
		for (int t = 0; t < n_; ++t) {
			if (f[size_t(t)].is_zero())
				continue;
			for (int s = 0; s < n_; ++s) {
				if (K_.at(t, s).is_zero())
					continue;
				Gen g1 = pack_gen(t, a), g2 = pack_gen(s, a);
				Monomial mo;
				if (g1 == g2)
					mo.f.emplace_back(g1, 2);
				else {
					mo.f.emplace_back(std::min(g1, g2), 1);
					mo.f.emplace_back(std::max(g1, g2), 1);
				}
				r.add_term(mo, half * f[size_t(t)] * K_.at(t, s));
			}
		}
	return r;
}

} // namespace bvlat
