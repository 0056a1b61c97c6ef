#include "bvlat/renorm.hpp"

#include <algorithm>

namespace bvlat {

namespace {

Functional derive_times(Functional const &F, Gen g, uint32_t times)
{
	Functional r = F;
	for (uint32_t k = 0; k < times && !r.is_zero(); ++k)
		r = r.left_derivative(g);
	return r;
}

/// coefficient of hbar^n, reinterpreted at power zero
Functional hbar_coefficient(Functional const &F, int n)
{
	Functional r(F.table(), F.trunc());
	for (auto const &[mo, c] : F.terms()) {
		Scalar s = c.coeff(n);
		if (!s.is_zero())
			r.add_term(mo, s);
	}
	return r;
}

mpq_class factorial(int n)
{
	mpq_class f(1);
	for (int k = 2; k <= n; ++k)
		f *= k;
	return f;
}

} // namespace

int RenMap::max_n() const
{
	int n = 1;
	for (auto const &k : kernels)
		n = std::max(n, k.n);
	return n;
}

bool RenMap::has_order(int n) const
{
	for (auto const &k : kernels)
		if (k.n == n)
			return true;
	return false;
}

Functional RenMap::component(std::vector<Functional const *> const &args, Model const &m) const
{
	int n = int(args.size());
	Functional out(args.at(0)->table(), args.at(0)->trunc());
	for (auto const &ker : kernels) {
		if (ker.n != n)
			continue;
		if (int(ker.derivs.size()) != n)
			throw domain_error("Z kernel arity mismatch");
		std::vector<uint32_t> ds = ker.derivs;
		std::sort(ds.begin(), ds.end());
		auto coeff = ker.coeff.at_trunc(out.trunc());
		do {
			for (int a : m.species().kinetic_ids())
				for (int x = 0; x < m.n_sites(); ++x) {
					Gen g = pack_gen(x, a);
					Functional prod = Functional::one(out.table(), out.trunc());
					bool dead = false;
					for (int j = 0; j < n; ++j) {
						auto d = derive_times(*args[size_t(j)], g, ds[size_t(j)]);
						if (d.is_zero()) {
							dead = true;
							break;
						}
						prod = prod * d;
					}
					if (!dead)
						out += prod.scaled(coeff);
				}
		} while (std::next_permutation(ds.begin(), ds.end()));
	}
	return out;
}

Functional RenMap::apply(Functional const &V, Model const &m) const
{
	Functional out = V;
	for (int n = 2; n <= max_n(); ++n) {
		if (!has_order(n))
			continue;
		std::vector<Functional const *> args(size_t(n), &V);
		out += component(args, m).scaled(Scalar(mpq_class(1) / factorial(n)));
	}
	return out;
}

Functional RenMap::dapply(Functional const &V, Functional const &X, Model const &m) const
{
	Functional out = X;
	for (int n = 2; n <= max_n(); ++n) {
		if (!has_order(n))
			continue;
		std::vector<Functional const *> args(size_t(n - 1), &V);
		args.push_back(&X);
		out += component(args, m).scaled(Scalar(mpq_class(1) / factorial(n - 1)));
	}
	return out;
}

Functional RenMap::shifted(Functional const &V, Functional const &F, Model const &m) const
{
	return apply(V + F, m) - apply(V, m);
}

VSeries RenMap::apply_series(Functional const &V, Model const &m, int trunc, int vmax) const
{
	VSeries out = VSeries::zero(V.table(), trunc, vmax);
	auto Vw = V.at_trunc(trunc);
	if (vmax >= 1)
		out.c[1] = Vw;
	for (int n = 2; n <= std::min(vmax, max_n()); ++n) {
		if (!has_order(n))
			continue;
		std::vector<Functional const *> args(size_t(n), &Vw);
		out.c[size_t(n)] += component(args, m).scaled(Scalar(mpq_class(1) / factorial(n)));
	}
	return out;
}

/// Transport through Z^(1) at the 1/hbar-weighted interaction: every
/// insertion of V carries a factor i/hbar, matching the family S-matrices.
VSeries RenMap::dapply_series(Functional const &V, VSeries const &Y, Model const &m) const
{
	VSeries out = Y;
	auto Vw = V.at_trunc(Y.c[0].trunc());
	for (int k = 1; k <= Y.vmax(); ++k) {
		if (!has_order(k + 1))
			continue;
		Scalar w(1);
		for (int t = 0; t < k; ++t)
			w *= Scalar::i();
		for (int j = 0; k + j <= Y.vmax(); ++j) {
			if (Y.c[size_t(j)].is_zero())
				continue;
			std::vector<Functional const *> args(size_t(k), &Vw);
			args.push_back(&Y.c[size_t(j)]);
			out.c[size_t(k + j)] += component(args, m)
			                            .scaled(Scalar(mpq_class(1) / factorial(k)) * w)
			                            .shifted_hbar(-k);
		}
	}
	return out;
}

ZAxiomReport z_validate(RenMap const &Z, Model const &m, std::mt19937_64 &rng, int samples,
                        int trunc)
{
	ZAxiomReport rep;
	for (auto const &k : Z.kernels) {
		if (k.n < 2) {
			(k.n < 1 ? rep.z1 : rep.z2) = false;
			rep.detail += "kernel with n<2 breaks Z(0)=0 / Z'(0)=id; ";
		}
		if (int(k.derivs.size()) != k.n || std::any_of(k.derivs.begin(), k.derivs.end(),
		                                               [](uint32_t d) { return d < 1; })) {
			rep.z4 = false;
			rep.detail += "kernel derivative pattern invalid; ";
		}
		if (!k.coeff.is_zero() && k.coeff.min_power() < 1) {
			rep.z2 = false;
			rep.detail += "kernel coefficient below hbar^1; ";
		}
	}
	// Z3: additivity on disjoint supports, sampled
	auto rand_local = [&](std::set<int> const &sites) {
		std::uniform_int_distribution<int> num(-3, 3);
		std::uniform_int_distribution<int> deg(1, 3);
		Functional F(m.tabp(), trunc);
		int a = m.species().kinetic_ids().at(0);
		for (int x : sites) {
			Monomial mo;
			mo.f.emplace_back(pack_gen(x, a), uint32_t(deg(rng)));
			F.add_term(mo, Scalar(num(rng)));
		}
		return F;
	};
	int n = m.n_sites();
	for (int it = 0; it < samples; ++it) {
		int cut = 1 + it % std::max(1, n - 2);
		std::set<int> lo, mid, hi;
		for (int x = 0; x < n; ++x)
			(x < cut ? lo : (x == cut ? mid : hi)).insert(x);
		auto A = rand_local(lo), B = rand_local(mid), C = rand_local(hi);
		auto lhs = Z.apply(A + B + C, m);
		auto rhs = Z.apply(A + B, m) - Z.apply(B, m) + Z.apply(B + C, m);
		if (!(lhs == rhs)) {
			rep.z3 = false;
			rep.detail += "additivity failed on a sampled split; ";
			break;
		}
	}
	// supp Z_V(F) subset supp F
	for (int it = 0; it < samples; ++it) {
		std::set<int> all, sub;
		for (int x = 0; x < n; ++x)
			all.insert(x);
		sub.insert(it % n);
		auto V = rand_local(all), F = rand_local(sub);
		auto zv = Z.shifted(V, F, m);
		for (int x : zv.support())
			if (!F.support().count(x)) {
				rep.supp_ok = false;
				rep.detail += "supp Z_V(F) escaped supp F; ";
				break;
			}
	}
	return rep;
}

namespace {

/// set partitions of {0..n-1} as restricted growth strings
void for_each_partition(int n, std::function<void(std::vector<std::vector<int>> const &)> const &f)
{
	std::vector<int> a(size_t(n), 0);
	std::vector<int> maxp(size_t(n), 0);
	while (true) {
		int nb = 0;
		for (int i = 0; i < n; ++i)
			nb = std::max(nb, a[size_t(i)] + 1);
		std::vector<std::vector<int>> blocks(static_cast<size_t>(nb));
		for (int i = 0; i < n; ++i)
			blocks[size_t(a[size_t(i)])].push_back(i);
		f(blocks);
		// next restricted growth string
		int i = n - 1;
		while (i > 0 && a[size_t(i)] == maxp[size_t(i - 1)] + 1)
			--i;
		if (i == 0)
			return;
		a[size_t(i)] += 1;
		maxp[size_t(i)] = std::max(maxp[size_t(i - 1)], a[size_t(i)]);
		for (int j = i + 1; j < n; ++j) {
			a[size_t(j)] = 0;
			maxp[size_t(j)] = maxp[size_t(j - 1)];
		}
	}
}

} // namespace

Functional TnFamily::Tn(std::vector<Functional const *> const &args) const
{
	int n = int(args.size());
	if (n == 0)
		throw domain_error("Tn needs at least one argument");
	auto const *tab = args[0]->table();
	int trunc = args[0]->trunc();

	// expand multilinearly over parity parts so that the unshuffle signs of
	// the partition sum act on homogeneous slots
	std::vector<std::pair<Functional, Functional>> parts;
	for (auto const *f : args)
		parts.push_back(f->parity_parts());
	Functional out(tab, trunc);

	std::vector<Functional> slot(static_cast<size_t>(n));
	std::vector<int> parity(static_cast<size_t>(n));
	std::function<void(int)> expand = [&](int i) {
		if (i == n) {
			// partition sum on homogeneous slots
			for_each_partition(n, [&](std::vector<std::vector<int>> const &blocks) {
				for (auto const &B : blocks)
					if (int(B.size()) >= 2 && !Z_.has_order(int(B.size())))
						return;
				std::vector<int> perm;
				for (auto const &B : blocks)
					perm.insert(perm.end(), B.begin(), B.end());
				int sign = koszul_sign_of_permutation(perm, parity);
				Functional prod = Functional::one(tab, trunc);
				for (auto const &B : blocks) {
					Functional val;
					if (B.size() == 1)
						val = slot[size_t(B[0])];
					else {
						std::vector<Functional const *> ba;
						for (int ix : B)
							ba.push_back(&slot[size_t(ix)]);
						val = Z_.component(ba, *m_);
					}
					prod = prod * time_order(val, *m_, true);
				}
				auto t = time_order(prod, *m_, false);
				out += (sign < 0) ? -t : t;
			});
			return;
		}
		for (int pa = 0; pa < 2; ++pa) {
			Functional const &p = pa ? parts[size_t(i)].second : parts[size_t(i)].first;
			if (p.is_zero())
				continue;
			slot[size_t(i)] = p;
			parity[size_t(i)] = pa;
			expand(i + 1);
		}
	};
	expand(0);
	return out;
}

Functional TnFamily::Tren(Functional const &F) const
{
	auto T = beta_decompose(F, max_rank_);
	Functional out(F.table(), F.trunc());
	for (auto const &[slots, c] : T.comp) {
		if (slots.empty()) {
			out.add_term(Monomial{}, c);
			continue;
		}
		std::vector<Functional> sf;
		for (auto const &mo : slots) {
			Functional f(F.table(), F.trunc());
			f.add_term(mo, Scalar(1));
			sf.push_back(std::move(f));
		}
		std::vector<Functional const *> ptrs;
		for (auto const &f : sf)
			ptrs.push_back(&f);
		out += Tn(ptrs).scaled(c);
	}
	return out;
}

Functional TnFamily::Tren_inv(Functional const &F) const
{
	Functional G = F;
	int lo = F.min_hbar_power().value_or(0);
	int steps = F.trunc() - std::min(lo, 0) + 2;
	for (int k = 0; k < steps; ++k) {
		auto T = Tren(G);
		if (T == F)
			return G;
		G = G - (T - F);
	}
	if (!(Tren(G) == F))
		throw domain_error("Tren_inv did not converge: argument outside the Tren domain");
	return G;
}

Functional TnFamily::tren_product(Functional const &A, Functional const &B) const
{
	return Tren(Tren_inv(A) * Tren_inv(B));
}

BinOp TnFamily::tren_op() const
{
	return [this](Functional const &a, Functional const &b) { return tren_product(a, b); };
}

Functional TnFamily::bracket_tren(Functional const &X, Functional const &Y) const
{
	return Tren(antibracket(Tren_inv(X), Tren_inv(Y), *m_, BracketMode::geometric));
}

Functional TnFamily::bracket_tren_eom(Functional const &X) const
{
	return Tren(bracket_eom(Tren_inv(X), *m_, pointwise_op()));
}

VSeries TnFamily::smatrix_hat(Functional const &V, PerturbativeOrders const &o, int sign) const
{
	int W = o.work();
	auto Vw = V.at_trunc(W);
	VSeries out = VSeries::unit(V.table(), W, o.v);
	for (int k = 1; k <= o.v; ++k) {
		std::vector<Functional const *> args(size_t(k), &Vw);
		Scalar w = Scalar(1);
		for (int j = 0; j < k; ++j)
			w *= (sign > 0) ? Scalar::i() : -Scalar::i();
		auto t = Tn(args).scaled(Scalar(mpq_class(1) / factorial(k)) * w).shifted_hbar(-k);
		out.c[size_t(k)] = std::move(t);
	}
	return out;
}

VSeries TnFamily::insert_series(Functional const &V, Functional const &X,
                                PerturbativeOrders const &o) const
{
	int W = o.work();
	VSeries xs = VSeries::zero(V.table(), W, o.v);
	xs.c[0] = X.at_trunc(W);
	return insert_series_v(V, xs, o);
}

VSeries TnFamily::insert_series_v(Functional const &V, VSeries const &X,
                                  PerturbativeOrders const &o) const
{
	int W = o.work();
	auto Vw = V.at_trunc(W);
	VSeries out = VSeries::zero(V.table(), W, o.v);
	for (int j = 0; j <= o.v; ++j) {
		if (X.c[size_t(j)].is_zero())
			continue;
		for (int k = 0; k + j <= o.v; ++k) {
			if (k == 0) {
				out.c[size_t(j)] += X.c[size_t(j)];
				continue;
			}
			std::vector<Functional const *> args(size_t(k), &Vw);
			args.push_back(&X.c[size_t(j)]);
			Scalar w = Scalar(1);
			for (int t = 0; t < k; ++t)
				w *= Scalar::i();
			out.c[size_t(k + j)] +=
			    Tn(args).scaled(Scalar(mpq_class(1) / factorial(k)) * w).shifted_hbar(-k);
		}
	}
	return out;
}

TnFamily make_tn_family(Model const &m, RenMap Z)
{
	for (auto const &k : Z.kernels) {
		if (k.n < 2 || int(k.derivs.size()) != k.n)
			throw domain_error("invalid Z kernel arity");
		for (auto d : k.derivs)
			if (d < 1)
				throw domain_error("invalid Z kernel derivative pattern");
		if (!k.coeff.is_zero() && k.coeff.min_power() < 1)
			throw domain_error("Z kernel coefficients must carry hbar^1 or higher");
	}
	return TnFamily(m, std::move(Z));
}

namespace {

/// Solves sum_{a+b=n} E_a(C_b) = ell_n for C, where E_a is the insertion of
/// the unknown into the family exponential: the lattice meaning of dividing
/// by e^{iV/h} on the left of a time-ordered product.
VSeries insertion_divide(TnFamily const &fam, Functional const &V, VSeries const &ell,
                         PerturbativeOrders const &o)
{
	int W = o.work();
	auto Vw = V.at_trunc(W);
	VSeries C = VSeries::zero(ell.c[0].table(), W, o.v);
	for (int n = 0; n <= o.v; ++n) {
		Functional rhs = ell.c[size_t(n)];
		for (int a = 1; a <= n; ++a) {
			if (C.c[size_t(n - a)].is_zero())
				continue;
			std::vector<Functional const *> args(size_t(a), &Vw);
			args.push_back(&C.c[size_t(n - a)]);
			Scalar w = Scalar(1);
			for (int t = 0; t < a; ++t)
				w *= Scalar::i();
			rhs -= fam.Tn(args)
			           .scaled(Scalar(mpq_class(1) / factorial(a)) * w)
			           .shifted_hbar(-a);
		}
		C.c[size_t(n)] = std::move(rhs);
	}
	return C;
}

} // namespace

VSeries qbv_ren_series_v(VSeries const &X, Functional const &V, TnFamily const &fam,
                         PerturbativeOrders const &o)
{
	auto const &m = fam.model();
	require_window_support(V, m, "qbv_ren");
	auto ins = fam.insert_series_v(V, X, o);
	VSeries ell = VSeries::zero(X.c[0].table(), o.work(), o.v);
	for (int k = 0; k <= o.v; ++k)
		ell.c[size_t(k)] = bracket_eom(ins.c[size_t(k)], m, star_op(m));
	return insertion_divide(fam, V, ell, o);
}

VSeries qbv_ren_series(Functional const &X, Functional const &V, TnFamily const &fam,
                       PerturbativeOrders const &o)
{
	VSeries xs = VSeries::zero(X.table(), o.work(), o.v);
	xs.c[0] = X.at_trunc(o.work());
	return qbv_ren_series_v(xs, V, fam, o);
}

Functional qbv_ren(Functional const &X, Functional const &V, TnFamily const &fam,
                   PerturbativeOrders const &o)
{
	return finish(qbv_ren_series(X, V, fam, o).sum(), o, "qbv_ren");
}

AnomalyResult anomaly_extract(Functional const &V, Functional const &X, TnFamily const &fam,
                              PerturbativeOrders const &o)
{
	auto const &m = fam.model();
	require_window_support(V, m, "anomaly_extract");
	require_window_support(X, m, "anomaly_extract");
	int W = o.work();

	auto shat = qbv_ren_series(X, V, fam, o);
	VSeries cls = VSeries::zero(X.table(), W, o.v);
	cls.c[0] = fam.bracket_tren_eom(X.at_trunc(W));
	if (o.v >= 1)
		cls.c[1] = fam.bracket_tren(X.at_trunc(W), V.at_trunc(W));
	auto anomaly = cls - shat;

	AnomalyResult res;
	res.series = anomaly;
	// The locality and support statements hold on the local domain (every
	// term of X a single-site density); off it the map extends by
	// linearity and the result is as multilocal as the argument. The
	// interaction-free part lives in supp X; interaction-dependent orders
	// lie in the stencil closures of supp X and supp V (coincident kernel
	// points can sit one field-equation stencil away on the lattice).
	bool x_local = true;
	for (auto const &[mo, c] : X.terms())
		x_local = x_local && mono_support(mo).size() <= 1;
	auto xs = X.support();
	auto xc = m.grow_by_stencil(xs);
	auto vc = m.grow_by_stencil(V.support());
	for (int n = 0; n <= o.v && x_local; ++n) {
		auto const &comp = anomaly.c[size_t(n)];
		for (auto const &[mo, c] : comp.terms()) {
			auto supp = mono_support(mo);
			if (supp.size() > 1)
				throw domain_error(
				    "anomaly_extract: nonlocal residual at interaction order " +
				    std::to_string(n));
			for (int s : supp) {
				bool ok = (n == 0) ? xs.count(s) != 0
				                   : (xc.count(s) != 0 && vc.count(s) != 0);
				if (!ok)
					throw domain_error(
					    "anomaly_extract: support property violated at order " +
					    std::to_string(n));
			}
		}
	}
	res.value = finish(anomaly.sum(), o, "anomaly_extract");
	res.support = res.value.support();
	// loop order: each interaction insertion carries 1/hbar, so the
	// intrinsic order of the lambda^k component is its power plus k
	for (int k = 0; k <= o.v; ++k)
		if (auto p = anomaly.c[size_t(k)].min_hbar_power()) {
			int ord = *p + k;
			res.leading_hbar_order =
			    res.leading_hbar_order ? std::min(*res.leading_hbar_order, ord) : ord;
		}
	return res;
}

VSeries qme_ren_residual_series(Functional const &V, TnFamily const &fam,
                                PerturbativeOrders const &o)
{
	auto const &m = fam.model();
	require_window_support(V, m, "qme_ren_residual");
	int W = o.work();
	auto Vw = V.at_trunc(W);
	VSeries r = VSeries::zero(V.table(), W, o.v);
	if (o.v >= 1)
		r.c[1] = fam.bracket_tren_eom(Vw);
	if (o.v >= 2)
		r.c[2] = fam.bracket_tren(Vw, Vw).scaled(Scalar::rational(1, 2));
	// the anomaly of the af = 0 part is set to zero by convention
	auto Xpart = Vw - Vw.af_part(0);
	if (!Xpart.is_zero()) {
		auto an = anomaly_extract(V, Xpart, fam, o);
		for (int k = 0; k + 1 <= o.v; ++k)
			r.c[size_t(k + 1)] -= an.series.c[size_t(k)];
	}
	return r;
}

Functional qme_ren_residual(Functional const &V, TnFamily const &fam, PerturbativeOrders const &o)
{
	return finish(qme_ren_residual_series(V, fam, o).sum(), o, "qme_ren_residual");
}

VSeries rv_ren_series_v(Functional const &V, VSeries const &G, TnFamily const &fam,
                        PerturbativeOrders const &o)
{
	auto const &m = fam.model();
	auto Sp = fam.smatrix_hat(V, o, +1);
	auto inv = vs_inverse(Sp, star_op(m));
	auto EG = fam.insert_series_v(V, G, o);
	return vs_mul(inv, EG, star_op(m));
}

VSeries rv_ren_series(Functional const &V, Functional const &G, TnFamily const &fam,
                      PerturbativeOrders const &o)
{
	VSeries gs = VSeries::zero(G.table(), o.work(), o.v);
	gs.c[0] = G.at_trunc(o.work());
	return rv_ren_series_v(V, gs, fam, o);
}

AbsorbResult absorb_anomaly(Functional const &S1, TnFamily const &fam, PerturbativeOrders const &o,
                            AbsorbConfig const &cfg)
{
	auto const &m = fam.model();
	auto const &tab = m.species();
	int W = o.work();
	AbsorbResult res;

	// classical master equation for S0 + S1
	auto S1w = S1.at_trunc(W);
	auto cme = hbar_coefficient(fam.bracket_tren_eom(S1w) +
	                                fam.bracket_tren(S1w, S1w).scaled(Scalar::rational(1, 2)),
	                            0);
	if (!cme.is_zero())
		throw domain_error("absorb_anomaly: S1 does not solve the classical master equation");

	auto S1cl = hbar_coefficient(S1w, 0);
	auto class_bv = [&](Functional const &w) {
		return hbar_coefficient(bracket_eom(w, m, pointwise_op()) +
		                            antibracket(w, S1cl, m, BracketMode::geometric),
		                        0);
	};

	// window-local basis: per-site monomials, ghost 0, even, bounded degree
	std::vector<Monomial> basis;
	{
		std::vector<int> sids;
		for (int i = 0; i < tab.size(); ++i)
			sids.push_back(i);
		for (int x : m.window()) {
			std::vector<Monomial> stack{Monomial{}};
			std::function<void(Monomial const &, size_t, int, int)> grow =
			    [&](Monomial const &mo, size_t from, int deg, int af) {
				    if (deg > 0 && mono_ghost(mo, tab) == 0 &&
				        mono_parity(mo, tab) == 0)
					    basis.push_back(mo);
				    if (deg >= cfg.degree)
					    return;
				    for (size_t i = from; i < sids.size(); ++i) {
					    int sid = sids[i];
					    if (tab[sid].af && af >= cfg.max_af)
						    continue;
					    Monomial next = mo;
					    Gen g = pack_gen(x, sid);
					    if (!next.f.empty() && next.f.back().first == g) {
						    if (tab[sid].odd)
							    continue;
						    next.f.back().second += 1;
					    } else
						    next.f.emplace_back(g, 1);
					    grow(next, i, deg + 1, af + tab[sid].af);
				    }
			    };
			grow(Monomial{}, 0, 0, 0);
		}
	}

	Functional Wfun = S1w;
	for (int n = 1; n <= o.hbar; ++n) {
		auto Rser = qme_ren_residual_series(Wfun, fam, o);
		auto Rn = hbar_coefficient(Rser.sum(), n);
		if (Rn.is_zero())
			continue;
		// consistency: the right-hand side must be a classical cocycle
		if (!class_bv(Rn).is_zero())
			throw domain_error("absorb_anomaly: consistency condition fails at order " +
			                   std::to_string(n));
		// solve {w, S0+S1}_cl = -Rn over the basis
		std::vector<Functional> cols;
		for (auto const &b : basis) {
			Functional bf(m.tabp(), W);
			bf.add_term(b, Scalar(1));
			cols.push_back(class_bv(bf));
		}
		// assemble the monomial-indexed linear system
		std::map<Monomial, size_t> rows;
		auto touch = [&](Functional const &f) {
			for (auto const &[mo, c] : f.terms())
				rows.try_emplace(mo, rows.size());
		};
		for (auto const &c : cols)
			touch(c);
		Functional target = -Rn;
		touch(target);
		size_t nr = rows.size(), nc = cols.size();
		std::vector<std::vector<Scalar>> A(nr, std::vector<Scalar>(nc + 1));
		for (size_t j = 0; j < nc; ++j)
			for (auto const &[mo, c] : cols[j].terms())
				A[rows[mo]][j] = c.coeff(0);
		for (auto const &[mo, c] : target.terms())
			A[rows[mo]][nc] = c.coeff(0);
		// exact elimination
		std::vector<int> pivot_col(nr, -1);
		size_t r = 0;
		for (size_t col = 0; col < nc && r < nr; ++col) {
			size_t hit = nr;
			for (size_t k = r; k < nr; ++k)
				if (!A[k][col].is_zero()) {
					hit = k;
					break;
				}
			if (hit == nr)
				continue;
			std::swap(A[r], A[hit]);
			Scalar inv = Scalar(1) / A[r][col];
			for (auto &v : A[r])
				v *= inv;
			for (size_t k = 0; k < nr; ++k) {
				if (k == r || A[k][col].is_zero())
					continue;
				Scalar fny = A[k][col];
				for (size_t j = col; j <= nc; ++j)
					A[k][j] -= fny * A[r][j];
			}
			pivot_col[r] = int(col);
			++r;
		}
		bool consistent = true;
		for (size_t k = r; k < nr; ++k)
			if (!A[k][nc].is_zero())
				consistent = false;
		if (!consistent) {
			// report the class with no preimage in the configured space
			std::vector<Scalar> x(nc);
			for (size_t k = 0; k < r; ++k)
				x[size_t(pivot_col[k])] = A[k][nc];
			Functional fit(m.tabp(), W);
			for (size_t j = 0; j < nc; ++j)
				if (!x[j].is_zero()) {
					Functional bf(m.tabp(), W);
					bf.add_term(basis[j], Scalar(1));
					fit += class_bv(bf).scaled(x[j]);
				}
			res.absorbed = false;
			res.failed_order = n;
			res.obstruction = finish(target - fit, o, "absorb_anomaly obstruction");
			res.note = "anomaly class has no preimage in the configured local space";
			res.W = Wfun.at_trunc(o.hbar);
			return res;
		}
		std::vector<Scalar> x(nc);
		for (size_t k = 0; k < r; ++k)
			x[size_t(pivot_col[k])] = A[k][nc];
		Functional wsol(m.tabp(), W);
		for (size_t j = 0; j < nc; ++j)
			if (!x[j].is_zero()) {
				Functional bf(m.tabp(), W);
				bf.add_term(basis[j], HbarSeries::term(x[j], n, W));
				wsol += bf;
			}
		Wfun += wsol;
	}
	auto final_res = qme_ren_residual(Wfun, fam, o);
	if (!final_res.is_zero()) {
		res.absorbed = false;
		res.note = "residual persists after absorption";
		res.obstruction = final_res;
		res.W = Wfun.at_trunc(o.hbar);
		return res;
	}
	res.absorbed = true;
	res.W = Wfun.at_trunc(o.hbar);
	return res;
}

namespace {

std::vector<Scalar> indicator(Model const &m, int lo, int hi)
{
	std::vector<Scalar> f(size_t(m.n_sites()));
	for (int x = lo; x <= hi && x < m.n_sites(); ++x)
		if (x >= 0)
			f[size_t(x)] = Scalar(1);
	return f;
}

} // namespace

RgReport rg_covariance_check(Lagrangian const &L0, Lagrangian const &L1, TnFamily const &fam,
                             PerturbativeOrders const &o, std::mt19937_64 &rng, int samples)
{
	auto const &m = fam.model();
	RgReport rep;
	int W = o.work();
	TnFamily toy(m, RenMap{});

	// (a) support containment of the transported extended residual
	for (int it = 0; it < samples; ++it) {
		int n = m.n_sites();
		std::uniform_int_distribution<int> pick(0, std::max(0, n - 4));
		int a = pick(rng);
		int b = std::min(n - 1, a + 3);
		auto f = indicator(m, a, b);
		auto f1 = indicator(m, a + 1, b - 1);
		auto V1 = L1(f1, W);
		auto L0f = L0(f, W);

		auto S = toy.smatrix_hat(V1, o, +1);
		VSeries ell = VSeries::zero(m.tabp(), W, o.v);
		for (int k = 0; k <= o.v; ++k)
			ell.c[size_t(k)] = antibracket(S.c[size_t(k)], L0f, m, BracketMode::star);
		auto A = [&] {
			// toy insertion division == binary division by e^{iV/h}
			auto Em = exp_iv_over_hbar(V1, m, o, -1);
			return vs_mul(Em, ell, tprod_op(m));
		}();
		std::set<int> box = m.d_support(f);
		for (int x : m.d_support(f1))
			box.insert(x);
		auto Ap = fam.Z().dapply_series(V1, A, m);
		for (int k = 0; k <= o.v; ++k) {
			for (int x : A.c[size_t(k)].support())
				if (!box.count(x)) {
					rep.support_ok = false;
					rep.detail += "base residual escaped the boundary support; ";
				}
			for (int x : Ap.c[size_t(k)].support())
				if (!box.count(x)) {
					rep.support_ok = false;
					rep.detail += "transported residual escaped the boundary support; ";
				}
		}
		if (!rep.support_ok)
			break;
	}

	// (b) s_{Z(S1)} o Z'(S1) = Z'(S1) o s'_{S1} on random window arguments
	{
		std::vector<Scalar> fw(size_t(m.n_sites()));
		for (int x : m.window())
			fw[size_t(x)] = Scalar(1);
		auto S1 = L1(fw, W);
		auto Zs = fam.Z().apply_series(S1, m, W, o.v);

		std::uniform_int_distribution<int> wsite(*m.window().begin(), *m.window().rbegin());
		std::uniform_int_distribution<int> coin(0, 1);
		for (int it = 0; it < std::max(2, samples / 2); ++it) {
			int x = wsite(rng);
			int a = m.species().kinetic_ids().at(0);
			Functional X(m.tabp(), W);
			Monomial mo;
			mo.f.emplace_back(pack_gen(x, m.species()[a].partner), 1);
			if (coin(rng)) {
				Gen g = pack_gen(x, a);
				mo.f.insert(mo.f.begin(), {g, uint32_t(1 + coin(rng))});
			}
			X.add_term(mo, Scalar(1));

			// left side: toy quantum BV operator at the transformed
			// interaction. Every insertion carries its i/hbar weight, so
			// the exponent is Z evaluated on the weighted argument; the
			// division uses the series inverse exp(-A) -- the sign-flipped
			// family maps are not inverses once Z is nonlinear.
			auto E = [&](int sign) {
				VSeries Aa = VSeries::zero(m.tabp(), W, o.v);
				for (int k = 1; k <= o.v; ++k) {
					Scalar w(sign);
					for (int t = 0; t < k; ++t)
						w *= Scalar::i();
					Aa.c[size_t(k)] =
					    Zs.c[size_t(k)].scaled(w).shifted_hbar(-k);
				}
				return vs_exp(Aa, tprod_op(m));
			};
			VSeries X0 = VSeries::zero(m.tabp(), W, o.v);
			X0.c[0] = X.at_trunc(W);
			auto Xs = fam.Z().dapply_series(S1, X0, m);
			auto ins = vs_mul(E(+1), Xs, tprod_op(m));
			auto br = vs_map(ins, [&](Functional const &F) {
				return bracket_eom(F, m, star_op(m));
			});
			auto lhs = vs_mul(E(-1), br, tprod_op(m));

			// right side: Z'(S1) applied to the family BV operator
			auto sx = qbv_ren_series(X, S1, fam, o);
			auto rhs = fam.Z().dapply_series(S1, sx, m);

			if (!(lhs == rhs)) {
				rep.intertwining_ok = false;
				rep.detail += "BV-operator intertwining failed; ";
				break;
			}
		}
	}
	return rep;
}

AdiabaticReport adiabatic_qme_check(Lagrangian const &L0, Lagrangian const &L1,
                                    TnFamily const &fam, PerturbativeOrders const &o,
                                    std::mt19937_64 &rng, int samples)
{
	auto const &m = fam.model();
	AdiabaticReport rep;
	int W = o.work();
	for (int it = 0; it < samples; ++it) {
		int n = m.n_sites();
		std::uniform_int_distribution<int> pick(0, std::max(0, n - 4));
		int a = pick(rng);
		int b = std::min(n - 1, a + 3);
		auto f = indicator(m, a, b);
		auto f1 = indicator(m, a + 1, b - 1);
		auto V1 = L1(f1, W);
		auto L0f = L0(f, W);

		auto S = fam.smatrix_hat(V1, o, +1);
		VSeries ell = VSeries::zero(m.tabp(), W, o.v);
		for (int k = 0; k <= o.v; ++k)
			ell.c[size_t(k)] = antibracket(S.c[size_t(k)], L0f, m, BracketMode::star);
		// residual of the extended master equation
		auto C = [&] {
			VSeries out = VSeries::zero(m.tabp(), W, o.v);
			auto Vw = V1.at_trunc(W);
			for (int nn = 0; nn <= o.v; ++nn) {
				Functional rhs = ell.c[size_t(nn)];
				for (int aa = 1; aa <= nn; ++aa) {
					if (out.c[size_t(nn - aa)].is_zero())
						continue;
					std::vector<Functional const *> args(size_t(aa), &Vw);
					args.push_back(&out.c[size_t(nn - aa)]);
					Scalar w = Scalar(1);
					for (int t = 0; t < aa; ++t)
						w *= Scalar::i();
					rhs -= fam.Tn(args)
					           .scaled(Scalar(mpq_class(1) / factorial(aa)) * w)
					           .shifted_hbar(-aa);
				}
				out.c[size_t(nn)] = std::move(rhs);
			}
			return out;
		}();

		std::set<int> box = m.d_support(f);
		for (int x : m.d_support(f1))
			box.insert(x);
		for (int k = 0; k <= o.v; ++k)
			for (int x : C.c[size_t(k)].support())
				if (!box.count(x)) {
					rep.support_ok = false;
					rep.detail += "extended residual escaped the boundary support; ";
				}

		// cross-check against the two-bracket anomaly form at i/hbar weight
		auto brTren = [&](Functional const &P, Functional const &Q) {
			return fam.Tren(antibracket(fam.Tren_inv(P), fam.Tren_inv(Q), m,
			                            BracketMode::geometric));
		};
		VSeries cls = VSeries::zero(m.tabp(), W, o.v);
		cls.c[0] = brTren(V1.at_trunc(W), L0f); // equals {V, L0(f)} at lambda^1 weight
		VSeries form = VSeries::zero(m.tabp(), W, o.v);
		if (o.v >= 1)
			form.c[1] = cls.c[0];
		if (o.v >= 2)
			form.c[2] = brTren(V1.at_trunc(W), V1.at_trunc(W)).scaled(Scalar::rational(1, 2));
		// anomaly with the cutoff pairing
		{
			auto insX = fam.insert_series(V1, V1.at_trunc(W) - V1.at_trunc(W).af_part(0), o);
			VSeries ellx = VSeries::zero(m.tabp(), W, o.v);
			for (int k = 0; k <= o.v; ++k)
				ellx.c[size_t(k)] =
				    antibracket(insX.c[size_t(k)], L0f, m, BracketMode::star);
			VSeries Cx = VSeries::zero(m.tabp(), W, o.v);
			auto Vw = V1.at_trunc(W);
			for (int nn = 0; nn <= o.v; ++nn) {
				Functional rhs = ellx.c[size_t(nn)];
				for (int aa = 1; aa <= nn; ++aa) {
					std::vector<Functional const *> args(size_t(aa), &Vw);
					args.push_back(&Cx.c[size_t(nn - aa)]);
					Scalar w = Scalar(1);
					for (int t = 0; t < aa; ++t)
						w *= Scalar::i();
					rhs -= fam.Tn(args)
					           .scaled(Scalar(mpq_class(1) / factorial(aa)) * w)
					           .shifted_hbar(-aa);
				}
				Cx.c[size_t(nn)] = std::move(rhs);
			}
			VSeries clsx = VSeries::zero(m.tabp(), W, o.v);
			auto Xc = V1.at_trunc(W) - V1.at_trunc(W).af_part(0);
			clsx.c[0] = brTren(Xc, L0f);
			if (o.v >= 1)
				clsx.c[1] = brTren(Xc, V1.at_trunc(W));
			auto anom = clsx - Cx;
			for (int k = 0; k + 1 <= o.v; ++k)
				form.c[size_t(k + 1)] -= anom.c[size_t(k)];
		}
		VSeries lhs = C;
		VSeries rhs = vs_map(form, [&](Functional const &F) {
			return F.scaled(Scalar::i()).shifted_hbar(-1);
		});
		if (!(lhs == rhs)) {
			rep.form_ok = false;
			rep.detail += "extended residual disagrees with the anomaly form; ";
		}
		if (!rep.all())
			break;
	}
	return rep;
}

std::optional<RenMap> z_fit_correction(Functional const &S1, Functional const &W, Model const &m,
                                       PerturbativeOrders const &o)
{
	Functional target = W - S1.at_trunc(W.trunc());
	if (target.is_zero())
		return RenMap{};
	// candidate basis of kernel shapes
	std::vector<ZKernel> shapes;
	for (int n = 2; n <= 3; ++n)
		for (uint32_t d1 = 1; d1 <= 2; ++d1)
			for (uint32_t d2 = d1; d2 <= 2; ++d2)
				for (int p = 1; p <= o.hbar; ++p) {
					ZKernel k;
					k.n = n;
					k.derivs.assign(size_t(n), 1);
					k.derivs[0] = d1;
					k.derivs[1] = d2;
					k.coeff = HbarSeries::term(Scalar(1), p, W.trunc());
					shapes.push_back(k);
				}
	std::vector<Functional> cols;
	for (auto const &sh : shapes) {
		RenMap z;
		z.kernels.push_back(sh);
		cols.push_back(z.apply(S1.at_trunc(W.trunc()), m) - S1.at_trunc(W.trunc()));
	}
	// linear solve for real rational coefficients
	std::map<std::pair<Monomial, int>, size_t> rows;
	auto touch = [&](Functional const &f) {
		for (auto const &[mo, c] : f.terms())
			if (!c.is_zero())
				for (int p = c.min_power(); p <= c.max_power(); ++p)
					if (!c.coeff(p).is_zero())
						rows.try_emplace({mo, p}, rows.size());
	};
	for (auto const &c : cols)
		touch(c);
	touch(target);
	size_t nr = rows.size(), nc = cols.size();
	std::vector<std::vector<Scalar>> A(nr, std::vector<Scalar>(nc + 1));
	for (size_t j = 0; j < nc; ++j)
		for (auto const &[mo, c] : cols[j].terms())
			for (int p = c.min_power(); p <= c.max_power(); ++p)
				if (!c.coeff(p).is_zero())
					A[rows[{mo, p}]][j] = c.coeff(p);
	for (auto const &[mo, c] : target.terms())
		for (int p = c.min_power(); p <= c.max_power(); ++p)
			if (!c.coeff(p).is_zero())
				A[rows[{mo, p}]][nc] = c.coeff(p);
	size_t r = 0;
	std::vector<int> pivot_col(nr, -1);
	for (size_t col = 0; col < nc && r < nr; ++col) {
		size_t hit = nr;
		for (size_t k = r; k < nr; ++k)
			if (!A[k][col].is_zero()) {
				hit = k;
				break;
			}
		if (hit == nr)
			continue;
		std::swap(A[r], A[hit]);
		Scalar inv = Scalar(1) / A[r][col];
		for (auto &v : A[r])
			v *= inv;
		for (size_t k = 0; k < nr; ++k) {
			if (k == r || A[k][col].is_zero())
				continue;
			Scalar f = A[k][col];
			for (size_t j = col; j <= nc; ++j)
				A[k][j] -= f * A[r][j];
		}
		pivot_col[r] = int(col);
		++r;
	}
	for (size_t k = r; k < nr; ++k)
		if (!A[k][nc].is_zero())
			return std::nullopt;
	RenMap out;
	for (size_t k = 0; k < r; ++k) {
		Scalar c = A[k][nc];
		if (c.is_zero())
			continue;
		ZKernel ker = shapes[size_t(pivot_col[k])];
		ker.coeff = ker.coeff.scaled(c);
		out.kernels.push_back(ker);
	}
	// verify exactly
	if (!(out.apply(S1.at_trunc(W.trunc()), m) == W))
		return std::nullopt;
	return out;
}

} // namespace bvlat
