#include "bvlat/products.hpp"

namespace bvlat {

Functional star(Functional const &F, Functional const &G, Model const &m)
{
	// per-contraction weight (i hbar/2) Delta(x,y)
	return biproduct(F, G, m, m.delta(),
	                 HbarSeries::term(Scalar(0, 1) * Scalar::rational(1, 2), 1, F.trunc()));
}

Functional tprod(Functional const &F, Functional const &G, Model const &m)
{
	return biproduct(F, G, m, m.delta_D(), HbarSeries::term(Scalar::i(), 1, F.trunc()));
}

Functional time_order(Functional const &F, Model const &m, bool inverse)
{
	Scalar c = inverse ? -Scalar::i() : Scalar::i();
	return op_exp(F, m, m.delta_D(), HbarSeries::term(c, 1, F.trunc()));
}

Functional alpha_H(Functional const &F, Model const &m, bool inverse)
{
	Scalar c = inverse ? Scalar(-1) : Scalar(1);
	return op_exp(F, m, m.H(), HbarSeries::term(c, 1, F.trunc()));
}

Functional star_H(Functional const &F, Functional const &G, Model const &m)
{
	return alpha_H(star(alpha_H(F, m, true), alpha_H(G, m, true), m), m, false);
}

Functional tprod_scale(Functional const &F, Functional const &G, Model const &m, Mat const &hL)
{
	return biproduct(F, G, m, hL - m.H(), HbarSeries::term(Scalar::i(), 1, F.trunc()));
}

Functional time_order_scale(Functional const &F, Model const &m, Mat const &hL, bool inverse)
{
	Scalar c = inverse ? -Scalar::i() : Scalar::i();
	return op_exp(F, m, hL - m.H(), HbarSeries::term(c, 1, F.trunc()));
}

BinOp star_op(Model const &m)
{
	return [&m](Functional const &a, Functional const &b) { return star(a, b, m); };
}
BinOp tprod_op(Model const &m)
{
	return [&m](Functional const &a, Functional const &b) { return tprod(a, b, m); };
}
BinOp pointwise_op()
{
	return [](Functional const &a, Functional const &b) { return a * b; };
}

VSeries VSeries::zero(SpeciesTable const *tab, int trunc, int vmax)
{
	VSeries s;
	s.c.assign(size_t(vmax) + 1, Functional(tab, trunc));
	return s;
}

VSeries VSeries::unit(SpeciesTable const *tab, int trunc, int vmax)
{
	VSeries s = zero(tab, trunc, vmax);
	s.c[0] = Functional::one(tab, trunc);
	return s;
}

bool VSeries::is_zero() const
{
	for (auto const &f : c)
		if (!f.is_zero())
			return false;
	return true;
}

Functional VSeries::sum() const
{
	Functional r = c.at(0);
	for (size_t k = 1; k < c.size(); ++k)
		r += c[k];
	return r;
}

VSeries &VSeries::operator+=(VSeries const &o)
{
	if (c.size() != o.c.size())
		throw truncation_error("interaction-order mismatch");
	for (size_t k = 0; k < c.size(); ++k)
		c[k] += o.c[k];
	return *this;
}

VSeries &VSeries::operator-=(VSeries const &o)
{
	if (c.size() != o.c.size())
		throw truncation_error("interaction-order mismatch");
	for (size_t k = 0; k < c.size(); ++k)
		c[k] -= o.c[k];
	return *this;
}

VSeries vs_mul(VSeries const &a, VSeries const &b, BinOp const &prod)
{
	VSeries r = VSeries::zero(a.c[0].table(), a.c[0].trunc(), a.vmax());
	for (int i = 0; i <= a.vmax(); ++i) {
		if (a.c[size_t(i)].is_zero())
			continue;
		for (int j = 0; i + j <= a.vmax(); ++j) {
			if (b.c[size_t(j)].is_zero())
				continue;
			r.c[size_t(i + j)] += prod(a.c[size_t(i)], b.c[size_t(j)]);
		}
	}
	return r;
}

VSeries vs_apply(VSeries const &a, Functional const &X, BinOp const &prod)
{
	VSeries r = VSeries::zero(a.c[0].table(), a.c[0].trunc(), a.vmax());
	for (size_t k = 0; k < a.c.size(); ++k)
		if (!a.c[k].is_zero())
			r.c[k] = prod(a.c[k], X);
	return r;
}

VSeries vs_map(VSeries const &a, std::function<Functional(Functional const &)> const &f)
{
	VSeries r = a;
	for (auto &x : r.c)
		x = f(x);
	return r;
}

VSeries vs_scaled(VSeries const &a, Scalar const &s)
{
	VSeries r = a;
	for (auto &x : r.c)
		x = x.scaled(s);
	return r;
}

VSeries vs_exp(VSeries const &A, BinOp const &prod)
{
	if (!A.c[0].is_zero())
		throw domain_error("vs_exp needs a vanishing constant term");
	VSeries acc = VSeries::unit(A.c[0].table(), A.c[0].trunc(), A.vmax());
	VSeries p = acc;
	mpq_class fact(1);
	for (int k = 1; k <= A.vmax(); ++k) {
		p = vs_mul(p, A, prod);
		if (p.is_zero())
			break;
		fact *= k;
		acc += vs_scaled(p, Scalar(mpq_class(1) / fact));
	}
	return acc;
}

VSeries vs_inverse(VSeries const &S, BinOp const &prod)
{
	auto one = Functional::one(S.c[0].table(), S.c[0].trunc());
	if (!(S.c[0] == one))
		throw domain_error("vs_inverse needs constant term 1");
	VSeries u = S;
	u.c[0] -= one; // u has interaction order >= 1
	VSeries acc = VSeries::unit(S.c[0].table(), S.c[0].trunc(), S.vmax());
	VSeries p = acc;
	for (int k = 1; k <= S.vmax(); ++k) {
		p = vs_mul(p, u, prod);
		if (p.is_zero())
			break;
		acc += (k % 2) ? vs_scaled(p, Scalar(-1)) : p;
	}
	return acc;
}

void require_window_support(Functional const &V, Model const &m, char const *what)
{
	for (int x : V.support())
		if (!m.in_window(x))
			throw support_error(std::string(what) + ": support escapes the window at site " +
			                    std::to_string(x));
}

VSeries exp_iv_over_hbar(Functional const &V, Model const &m, PerturbativeOrders const &o,
                         int sign)
{
	int W = o.work();
	VSeries A = VSeries::zero(V.table(), W, o.v);
	if (o.v >= 1)
		A.c[1] = V.at_trunc(W).scaled(sign > 0 ? Scalar::i() : -Scalar::i()).shifted_hbar(-1);
	return vs_exp(A, tprod_op(m));
}

VSeries smatrix_series(Functional const &V, Model const &m, PerturbativeOrders const &o)
{
	require_window_support(V, m, "smatrix");
	int W = o.work();
	VSeries A = VSeries::zero(V.table(), W, o.v);
	if (o.v >= 1)
		A.c[1] = V.at_trunc(W);
	return vs_exp(A, tprod_op(m));
}

Functional finish(Functional const &F, PerturbativeOrders const &o, char const *what)
{
	auto r = F.at_trunc(o.hbar);
	if (!r.hbar_regular())
		throw domain_error(std::string(what) +
		                   ": negative hbar powers survive (mis-weighted interaction?)");
	return r;
}

Functional smatrix(Functional const &V, Model const &m, PerturbativeOrders const &o)
{
	return finish(smatrix_series(V, m, o).sum(), o, "smatrix");
}

Functional bogoliubov_smatrix(Functional const &V, Functional const &F, Model const &m,
                              PerturbativeOrders const &o)
{
	require_window_support(V, m, "bogoliubov_smatrix");
	require_window_support(F, m, "bogoliubov_smatrix");
	auto SV = smatrix_series(V, m, o);
	auto one = Functional::one(SV.c[0].table(), SV.c[0].trunc());
	if (!(SV.c[0] == one))
		throw domain_error("bogoliubov_smatrix: leading term not invertible");
	auto SVF = smatrix_series(V + F, m, o);
	auto r = vs_mul(vs_inverse(SV, star_op(m)), SVF, star_op(m));
	return finish(r.sum(), o, "bogoliubov_smatrix");
}

VSeries retarded_map_series(Functional const &V, Functional const &F, Model const &m,
                            PerturbativeOrders const &o, bool inverse)
{
	// the interaction must sit in the window; the transported argument may
	// spread over the field-equation stencil (images of the BV operator do)
	require_window_support(V, m, "retarded_map");
	int W = o.work();
	auto Fw = F.at_trunc(W);
	auto Ep = exp_iv_over_hbar(V, m, o, +1);
	if (!inverse) {
		auto inv = vs_inverse(Ep, star_op(m));
		auto EF = vs_apply(Ep, Fw, tprod_op(m));
		return vs_mul(inv, EF, star_op(m));
	}
	auto Em = exp_iv_over_hbar(V, m, o, -1);
	auto EsF = vs_apply(Ep, Fw, star_op(m));
	return vs_mul(Em, EsF, tprod_op(m));
}

Functional retarded_map(Functional const &V, Functional const &F, Model const &m,
                        PerturbativeOrders const &o, bool inverse)
{
	return finish(retarded_map_series(V, F, m, o, inverse).sum(), o, "retarded_map");
}

Functional interacting_star(Functional const &F, Functional const &G, Functional const &V,
                            Model const &m, PerturbativeOrders const &o)
{
	auto RF = retarded_map_series(V, F, m, o);
	auto RG = retarded_map_series(V, G, m, o);
	auto P = vs_mul(RF, RG, star_op(m));
	// R_V^{-1} on a series: e^{-iV/h} .T (e^{iV/h} star .)
	auto Ep = exp_iv_over_hbar(V, m, o, +1);
	auto Em = exp_iv_over_hbar(V, m, o, -1);
	auto r = vs_mul(Em, vs_mul(Ep, P, star_op(m)), tprod_op(m));
	return finish(r.sum(), o, "interacting_star");
}

Functional timeorder_vectorfield(Functional const &X, Model const &m, bool inverse)
{
	auto af = X.afnum();
	if (!af || *af != 1)
		throw grading_error("timeorder_vectorfield needs a homogeneous #af = 1 argument");
	return time_order(X, m, inverse);
}

Functional tder(Functional const &Y, Functional const &F, Model const &m)
{
	auto const &tab = m.species();
	std::vector<int> all_ids(size_t(tab.size()));
	for (int i = 0; i < tab.size(); ++i)
		all_ids[size_t(i)] = i;
	auto y = time_order(Y, m, true);
	auto f = time_order(F, m, true);
	auto paired = vf_pairing(y, f, pointwise_op(), tab, all_ids, m.n_sites());
	return time_order(paired, m, false);
}

} // namespace bvlat
