#include "bvlat/bv.hpp"

namespace bvlat {

Functional bv_laplacian(Functional const &Q)
{
	auto const &tab = *Q.table();
	Functional out(Q.table(), Q.trunc());
	std::set<Gen> present;
	for (auto const &[mo, c] : Q.terms())
		for (auto const &[g, pw] : mo.f)
			if (!tab[gen_species(g)].af)
				present.insert(g);
	for (Gen g : present) {
		auto const &sp = tab[gen_species(g)];
		auto d1 = Q.left_derivative(g);
		if (d1.is_zero())
			continue;
		auto d2 = d1.left_derivative(pack_gen(gen_site(g), sp.partner));
		if (d2.is_zero())
			continue;
		out += sp.odd ? -d2 : d2;
	}
	return out;
}

Functional bv_laplacian_scale(Functional const &Q, Model const &m, Mat const &hL)
{
	auto const &tab = m.species();
	Mat M = m.K() * (hL - m.H());
	Functional out(Q.table(), Q.trunc());
	for (int a : tab.kinetic_ids()) {
		int af_id = tab[a].partner;
		for (int z = 0; z < m.n_sites(); ++z)
			for (int y = 0; y < m.n_sites(); ++y) {
				if (M.at(z, y).is_zero())
					continue;
				auto d1 = Q.left_derivative(pack_gen(y, a));
				if (d1.is_zero())
					continue;
				auto d2 = d1.left_derivative(pack_gen(z, af_id));
				if (d2.is_zero())
					continue;
				out += d2.scaled(M.at(z, y));
			}
	}
	return out;
}

namespace {

BinOp mode_op(Model const &m, BracketMode mode, Mat const *hL)
{
	switch (mode) {
	case BracketMode::geometric:
		return pointwise_op();
	case BracketMode::timeordered:
		return tprod_op(m);
	case BracketMode::star:
		return star_op(m);
	case BracketMode::scale:
		if (!hL)
			throw domain_error("scale bracket needs an h_Lambda matrix");
		return [&m, hL](Functional const &a, Functional const &b) {
			return tprod_scale(a, b, m, *hL);
		};
	}
	throw domain_error("bad bracket mode");
}

Functional laplacian_of_mode(Functional const &Q, Model const &m, BracketMode mode, Mat const *hL)
{
	if (mode == BracketMode::scale)
		return bv_laplacian_scale(Q, m, *hL);
	return bv_laplacian(Q);
}

} // namespace

Functional antibracket(Functional const &P, Functional const &Q, Model const &m, BracketMode mode,
                       Mat const *hL, bool kinetic_only)
{
	if (mode == BracketMode::scale)
		return antibracket_defect(P, Q, m, mode, hL);
	auto prod = mode_op(m, mode, hL);
	auto const &tab = m.species();
	Functional out(P.table(), P.trunc());
	auto [Pev, Pod] = P.parity_parts();
	for (int pa = 0; pa < 2; ++pa) {
		Functional const &Pp = pa ? Pod : Pev;
		if (Pp.is_zero())
			continue;
		for (int a = 0; a < tab.size(); ++a) {
			if (tab[a].af)
				continue;
			if (kinetic_only && !tab[a].kinetic)
				continue;
			int af_id = tab[a].partner;
			bool odd = tab[a].odd;
			for (int x = 0; x < m.n_sites(); ++x) {
				auto dP = Pp.left_derivative(pack_gen(x, a));
				if (!dP.is_zero()) {
					auto dQ = Q.left_derivative(pack_gen(x, af_id));
					if (!dQ.is_zero()) {
						auto t = prod(dP, dQ);
						out += (bracket_sign1(odd, pa) < 0) ? -t : t;
					}
				}
				auto daP = Pp.left_derivative(pack_gen(x, af_id));
				if (!daP.is_zero()) {
					auto dQ = Q.left_derivative(pack_gen(x, a));
					if (!dQ.is_zero()) {
						auto t = prod(daP, dQ);
						out += (bracket_sign2(odd, pa) < 0) ? -t : t;
					}
				}
			}
		}
	}
	return out;
}

Functional antibracket_defect(Functional const &P, Functional const &Q, Model const &m,
                              BracketMode mode, Mat const *hL)
{
	auto prod = mode_op(m, mode, hL);
	Functional out(P.table(), P.trunc());
	auto [Pev, Pod] = P.parity_parts();
	for (int pa = 0; pa < 2; ++pa) {
		Functional const &Pp = pa ? Pod : Pev;
		if (Pp.is_zero())
			continue;
		auto t = laplacian_of_mode(prod(Pp, Q), m, mode, hL);
		t -= prod(laplacian_of_mode(Pp, m, mode, hL), Q);
		auto last = prod(Pp, laplacian_of_mode(Q, m, mode, hL));
		t -= (pa ? -last : last);
		out += t;
	}
	return out;
}

Functional bracket_eom(Functional const &A, Model const &m, BinOp const &prod)
{
	auto const &tab = m.species();
	Functional out(A.table(), A.trunc());
	auto [Aev, Aod] = A.parity_parts();
	for (int pa = 0; pa < 2; ++pa) {
		Functional const &Ap = pa ? Aod : Aev;
		if (Ap.is_zero())
			continue;
		for (int a : tab.kinetic_ids()) {
			int af_id = tab[a].partner;
			for (int x = 0; x < m.n_sites(); ++x) {
				auto dA = Ap.left_derivative(pack_gen(x, af_id));
				if (dA.is_zero())
					continue;
				if (!m.in_window(x))
					throw support_error(
					    "field-equation pairing outside the window at site " +
					    std::to_string(x));
				auto t = prod(dA, m.eom(a, x, A.trunc()));
				out += (bracket_sign2(tab[a].odd, pa) < 0) ? -t : t;
			}
		}
	}
	return out;
}

Functional bracket_action(Functional const &A, Model const &m, BracketMode mode,
                          Functional const *theta0)
{
	auto r = bracket_eom(A, m, mode_op(m, mode, nullptr));
	if (theta0 && !theta0->is_zero())
		r += antibracket(A, *theta0, m, mode);
	return r;
}

namespace {

std::vector<int> field_ids(SpeciesTable const &tab)
{
	std::vector<int> ids;
	for (int i = 0; i < tab.size(); ++i)
		if (!tab[i].af)
			ids.push_back(i);
	return ids;
}

} // namespace

Functional koszul_classical(Functional const &X, Lagrangian const &L, Model const &m)
{
	auto region = m.grow_by_stencil(X.support());
	std::vector<Scalar> f(size_t(m.n_sites()));
	for (int x : region)
		f[size_t(x)] = Scalar(1);
	auto Lf = L({f}, X.trunc());
	return vf_pairing(X, Lf, pointwise_op(), m.species(), field_ids(m.species()), m.n_sites());
}

Functional koszul_classical_free(Functional const &X, Model const &m)
{
	return bracket_eom(X, m, pointwise_op());
}

Functional koszul_timeordered_free(Functional const &X, Model const &m)
{
	auto x = time_order(X, m, true);
	return time_order(koszul_classical_free(x, m), m, false);
}

Functional koszul_scale_free(Functional const &X, Model const &m, Mat const &hL)
{
	auto x = time_order_scale(X, m, hL, true);
	return time_order_scale(koszul_classical_free(x, m), m, hL, false);
}

VSeries qbv_hat_series(Functional const &X, Functional const &V, Model const &m,
                       PerturbativeOrders const &o, Functional const *theta0)
{
	// V must sit in the window; X may spread over the stencil (images of
	// the operator do), its antifield pairings are window-checked below
	require_window_support(V, m, "qbv_hat");
	Functional th;
	if (theta0 && !theta0->is_zero()) {
		auto af = theta0->afnum();
		if (!af || *af != 1)
			throw grading_error("qbv_hat: theta0 must be homogeneous with #af = 1");
		auto t0 = bracket_eom(*theta0, m, tprod_op(m));
		if (!t0.is_zero())
			throw domain_error("qbv_hat: {S0, theta0}_T does not vanish");
		th = theta0->at_trunc(o.work());
	}
	auto Ep = exp_iv_over_hbar(V, m, o, +1);
	auto Em = exp_iv_over_hbar(V, m, o, -1);
	auto ins = vs_apply(Ep, X.at_trunc(o.work()), tprod_op(m));
	auto br = vs_map(ins, [&](Functional const &A) {
		return bracket_action(A, m, BracketMode::star, theta0 ? &th : nullptr);
	});
	return vs_mul(Em, br, tprod_op(m));
}

Functional qbv_hat(Functional const &X, Functional const &V, Model const &m,
                   PerturbativeOrders const &o, Functional const *theta0)
{
	return finish(qbv_hat_series(X, V, m, o, theta0).sum(), o, "qbv_hat");
}

VSeries qme_residual_series(Functional const &V, Model const &m, PerturbativeOrders const &o)
{
	require_window_support(V, m, "qme_residual");
	int W = o.work();
	auto Vw = V.at_trunc(W);
	VSeries r = VSeries::zero(V.table(), W, o.v);
	auto ihbar = HbarSeries::term(Scalar::i(), 1, W);
	if (o.v >= 1)
		r.c[1] = bracket_action(Vw, m, BracketMode::timeordered) -
		         bv_laplacian(Vw).scaled(ihbar);
	if (o.v >= 2)
		r.c[2] = antibracket(Vw, Vw, m, BracketMode::timeordered)
		             .scaled(Scalar::rational(1, 2));
	return r;
}

Functional qme_residual(Functional const &V, Model const &m, PerturbativeOrders const &o)
{
	return finish(qme_residual_series(V, m, o).sum(), o, "qme_residual");
}

VSeries qme_bracket_route(Functional const &V, Model const &m, PerturbativeOrders const &o)
{
	auto Ep = exp_iv_over_hbar(V, m, o, +1);
	auto Em = exp_iv_over_hbar(V, m, o, -1);
	auto br = vs_map(Ep, [&](Functional const &A) {
		return bracket_action(A, m, BracketMode::star);
	});
	return vs_mul(Em, br, tprod_op(m));
}

VSeries qme_residual_scale_series(Functional const &V, Model const &m, PerturbativeOrders const &o,
                                  Mat const &hL)
{
	require_window_support(V, m, "qme_residual_scale");
	int W = o.work();
	auto Vw = V.at_trunc(W);
	VSeries r = VSeries::zero(V.table(), W, o.v);
	auto ihbar = HbarSeries::term(Scalar::i(), 1, W);
	if (o.v >= 1)
		r.c[1] = koszul_scale_free(Vw, m, hL) - bv_laplacian_scale(Vw, m, hL).scaled(ihbar);
	if (o.v >= 2)
		r.c[2] = antibracket(Vw, Vw, m, BracketMode::scale, &hL).scaled(Scalar::rational(1, 2));
	return r;
}

Functional qme_residual_scale(Functional const &V, Model const &m, PerturbativeOrders const &o,
                              Mat const &hL)
{
	return finish(qme_residual_scale_series(V, m, o, hL).sum(), o, "qme_residual_scale");
}

VSeries qme_bracket_route_scale(Functional const &V, Model const &m, PerturbativeOrders const &o,
                                Mat const &hL)
{
	int W = o.work();
	BinOp prodL = [&m, &hL](Functional const &a, Functional const &b) {
		return tprod_scale(a, b, m, hL);
	};
	VSeries A = VSeries::zero(V.table(), W, o.v);
	if (o.v >= 1)
		A.c[1] = V.at_trunc(W).scaled(Scalar::i()).shifted_hbar(-1);
	auto Ep = vs_exp(A, prodL);
	auto Em = vs_exp(vs_scaled(A, Scalar(-1)), prodL);
	auto br = vs_map(Ep, [&](Functional const &F) {
		return bracket_eom(F, m, star_op(m));
	});
	return vs_mul(Em, br, prodL);
}

Functional gauge_fermion_auto(Functional const &psi, Functional const &X, Model const &m)
{
	auto par = psi.parity(), gh = psi.ghost(), af = psi.afnum();
	if (!par || *par != 1 || !gh || *gh != -1 || !af || *af != 0)
		throw grading_error("gauge fermion must be odd with #gh = -1 and #af = 0");
	Functional acc = X, term = X;
	for (long n = 1; !term.is_zero(); ++n) {
		term = antibracket(psi, term, m, BracketMode::timeordered)
		           .scaled(Scalar(mpq_class(1, n)));
		acc += term;
	}
	return acc;
}

Functional onshell_reduce(Functional const &F, Model const &m)
{
	auto const &tab = m.species();
	int n = m.n_sites();
	// eliminate the free field equations over the window, latest sites first
	std::vector<int> wrows(m.window().begin(), m.window().end());
	std::vector<std::vector<Scalar>> rows;
	for (int x : wrows) {
		std::vector<Scalar> r(static_cast<size_t>(n));
		for (int s = 0; s < n; ++s)
			r[size_t(s)] = m.K().at(x, s);
		rows.push_back(std::move(r));
	}
	// column order: site descending
	std::vector<int> cols(static_cast<size_t>(n));
	for (int i = 0; i < n; ++i)
		cols[size_t(i)] = n - 1 - i;
	std::vector<int> pivot_site;
	size_t rix = 0;
	for (int c : cols) {
		if (rix >= rows.size())
			break;
		size_t hit = rows.size();
		for (size_t k = rix; k < rows.size(); ++k)
			if (!rows[k][size_t(c)].is_zero()) {
				hit = k;
				break;
			}
		if (hit == rows.size())
			continue;
		std::swap(rows[rix], rows[hit]);
		Scalar inv = Scalar(1) / rows[rix][size_t(c)];
		for (auto &v : rows[rix])
			v *= inv;
		for (size_t k = 0; k < rows.size(); ++k) {
			if (k == rix || rows[k][size_t(c)].is_zero())
				continue;
			Scalar f = rows[k][size_t(c)];
			for (int s = 0; s < n; ++s)
				rows[k][size_t(s)] -= f * rows[rix][size_t(s)];
		}
		pivot_site.push_back(c);
		++rix;
	}
	// collect the fully reduced rows: pivot variables now depend on free
	// variables only
	std::vector<std::pair<int, std::vector<Scalar>>> pivots;
	for (size_t k = 0; k < pivot_site.size(); ++k)
		pivots.emplace_back(pivot_site[k], rows[k]);
	// substitution per kinetic species: phi(pivot) -> -sum_{free} row[s] phi(s)
	std::map<Gen, Functional> subst;
	for (int a : tab.kinetic_ids())
		for (auto const &[c, row] : pivots) {
			Functional repl(F.table(), F.trunc());
			for (int s = 0; s < n; ++s) {
				if (s == c || row[size_t(s)].is_zero())
					continue;
				Monomial mo;
				mo.f.emplace_back(pack_gen(s, a), 1);
				repl.add_term(mo, -row[size_t(s)]);
			}
			subst[pack_gen(c, a)] = std::move(repl);
		}

	Functional out(F.table(), F.trunc());
	for (auto const &[mo, coeff] : F.terms()) {
		Functional term = Functional::one(F.table(), F.trunc()).scaled(coeff);
		for (auto const &[g, pw] : mo.f) {
			Functional fac;
			auto it = subst.find(g);
			if (it != subst.end())
				fac = it->second;
			else
				fac = Functional::generator(F.table(), F.trunc(), g);
			for (uint32_t k = 0; k < pw; ++k)
				term = term * fac;
		}
		out += term;
	}
	return out;
}

std::pair<bool, Functional> theta_identity_check(Functional const &V, Functional const &X,
                                                 Functional const &theta0, Model const &m,
                                                 PerturbativeOrders const &o)
{
	if (!theta0.is_zero()) {
		auto af = theta0.afnum();
		if (!af || *af != 1)
			throw grading_error("theta0 must be homogeneous with #af = 1");
		for (auto const &[mo, c] : theta0.terms())
			if (mo.degree() > 2)
				throw grading_error("theta0 must be linear in fields and antifields");
	}
	if (!bracket_eom(theta0, m, tprod_op(m)).is_zero())
		throw domain_error("theta_identity_check: {S0, theta0}_T does not vanish");

	int W = o.work();
	auto th = theta0.at_trunc(W);
	auto Ep = exp_iv_over_hbar(V, m, o, +1);
	auto ins = vs_apply(Ep, X.at_trunc(W), tprod_op(m));
	VSeries diff = VSeries::zero(V.table(), W, o.v);
	for (int k = 0; k <= o.v; ++k)
		diff.c[size_t(k)] = antibracket(ins.c[size_t(k)], th, m, BracketMode::timeordered) -
		                    antibracket(ins.c[size_t(k)], th, m, BracketMode::star);
	auto residual = diff.sum();
	return {residual.is_zero(), residual};
}

ScaleFamily ScaleFamily::default_family(Model const &m)
{
	ScaleFamily f;
	Mat H = m.H(), DD = m.delta_D();
	f.h = [H, DD](mpq_class const &lam) {
		if (lam < 0)
			throw domain_error("scale parameter must be >= 0");
		mpq_class w = lam / (lam + 1);
		return H + DD.scaled(Scalar(mpq_class(0), w));
	};
	f.limit = m.H_F();
	return f;
}

Mat ScaleFamily::at(mpq_class const &lambda) const
{
	Mat r = h(lambda);
	if (!r.symmetric())
		throw model_error("h_Lambda must be symmetric");
	return r;
}

} // namespace bvlat
