#include <doctest.h>

#include "bvlat/random_gen.hpp"
#include "bvlat/renorm.hpp"
#include "helpers.hpp"

using namespace bvlat;

namespace {

Functional ihbar_lap(Functional const &X)
{
	return bv_laplacian(X).scaled(HbarSeries::term(Scalar::i(), 1, X.trunc()));
}

} // namespace

TEST_CASE("beta decomposition")
{
	auto const &m = *tst::wave5().model;
	int N = 3;
	// product of two locals -> a rank-2 site-split tensor
	auto F = tst::sym(m, N, {{"phi", 1}, {"phi", 3}});
	auto T = beta_decompose(F, 3);
	REQUIRE(T.comp.size() == 1);
	CHECK(T.comp.begin()->first.size() == 2);
	CHECK(tensor_multiply(T) == F);

	// a local stays rank 1
	auto L = tst::sym(m, N, {{"phi", 2}, {"phi", 2}});
	CHECK(beta_decompose(L, 3).comp.begin()->first.size() == 1);

	// rank bound is enforced
	auto W3 = tst::sym(m, N, {{"phi", 1}, {"phi", 2}, {"phi", 3}});
	CHECK_THROWS_AS(beta_decompose(W3, 2), domain_error);

	// round trips on random multilocals, including graded ones
	std::mt19937_64 rng(61);
	RandomSpec s;
	s.max_af = 2;
	for (int it = 0; it < 40; ++it) {
		auto G = random_functional(m, rng, s, N);
		auto TT = beta_decompose(G, 4);
		CHECK(tensor_multiply(TT) == G);
		auto T2 = beta_decompose(tensor_multiply(TT), 4);
		CHECK(T2.comp == TT.comp);
	}

	// taylor-style oracle on the even sector: rank-2 slot entries are the
	// coefficients of the mixed monomials
	auto P = tst::sym(m, N, {{"phi", 1}, {"phi", 1}, {"phi", 3}}, Scalar::rational(5, 7));
	auto TP = beta_decompose(P, 2);
	REQUIRE(TP.comp.size() == 1);
	auto const &slots = TP.comp.begin()->first;
	CHECK(slots.at(0).f.at(0).second == 2);
	CHECK(slots.at(1).f.at(0).second == 1);
	CHECK(TP.comp.begin()->second == HbarSeries::constant(Scalar::rational(5, 7), N));
}

TEST_CASE("renormalization map: kernels and axioms")
{
	auto const &m = *tst::wave5().model;
	auto const &Z = tst::wave5().Z;
	int N = 4;
	std::mt19937_64 rng(67);

	// the bundled kernel is the same-site contraction c hbar sum F'(x)G'(x)
	auto F = tst::sym(m, N, {{"phi", 2}, {"phi", 2}});
	auto G = tst::sym(m, N, {{"phi", 2}, {"phi", 2}, {"phi", 2}});
	std::vector<Functional const *> args{&F, &G};
	auto z2 = Z.component(args, m);
	auto want = (F.left_derivative(tst::gen(m, "phi", 2)) *
	             G.left_derivative(tst::gen(m, "phi", 2)))
	                .scaled(HbarSeries::term(Scalar(1), 1, N));
	CHECK(z2 == want);

	// disjoint sites: the kernel needs coincident points
	auto H = tst::sym(m, N, {{"phi", 3}});
	std::vector<Functional const *> dis{&F, &H};
	CHECK(Z.component(dis, m).is_zero());

	auto rep = z_validate(Z, m, rng);
	CHECK(rep.all());
	CHECK(z_validate(RenMap{}, m, rng).all());

	// construction rejects malformed kernels outright
	{
		RenMap bad;
		bad.kernels.push_back({2, {1, 1}, HbarSeries::term(Scalar(1), 0, 8)});
		CHECK_THROWS_AS(make_tn_family(m, bad), domain_error);
		RenMap bad2;
		bad2.kernels.push_back({2, {1}, HbarSeries::term(Scalar(1), 1, 8)});
		CHECK_THROWS_AS(make_tn_family(m, bad2), domain_error);
	}

	// a constant-area kernel (n = 1) breaks the structural axioms
	{
		RenMap bad;
		bad.kernels.push_back({1, {1}, HbarSeries::term(Scalar(1), 1, 8)});
		auto r = z_validate(bad, m, rng);
		CHECK_FALSE(r.all());
	}
	// a kernel at hbar^0 is not a quantum correction
	{
		RenMap bad;
		bad.kernels.push_back({2, {1, 1}, HbarSeries::term(Scalar(1), 0, 8)});
		auto r = z_validate(bad, m, rng);
		CHECK_FALSE(r.z2);
	}

	// Z_V(F) support containment with explicit disjoint V, F
	auto V = tst::sym(m, N, {{"phi", 1}, {"phi", 1}});
	auto Fd = tst::sym(m, N, {{"phi", 3}, {"phi", 3}});
	auto zv = Z.shifted(V, Fd, m);
	CHECK(zv.support() == std::set<int>{3});
}

TEST_CASE("family maps: toy case, symmetry, causal factorization")
{
	auto const &m = *tst::wave5().model;
	auto const &b = tst::wave5();
	TnFamily toy(m, RenMap{});
	auto fam = make_tn_family(m, b.Z);
	int N = 4;
	std::mt19937_64 rng(71);

	// toy T2 on site-disjoint locals is the time-ordered product
	auto F = tst::sym(m, N, {{"phi", 1}, {"phi", 1}});
	auto G = tst::sym(m, N, {{"phi", 3}});
	std::vector<Functional const *> fg{&F, &G};
	CHECK(toy.Tn(fg) == tprod(F, G, m));

	// with the counterterm kernel, T2 gains the same-site contact term
	auto F2 = tst::sym(m, N, {{"phi", 2}, {"phi", 2}});
	auto G2 = tst::sym(m, N, {{"phi", 2}, {"phi", 2}, {"phi", 2}});
	std::vector<Functional const *> fg2{&F2, &G2};
	CHECK(fam.Tn(fg2) == toy.Tn(fg2) + b.Z.component(fg2, m));

	// graded symmetry in the arguments
	RandomSpec s;
	s.max_af = 1;
	s.max_degree = 3;
	s.max_terms = 2;
	for (int it = 0; it < 10; ++it) {
		auto A = random_functional(m, rng, s, N);
		auto B = random_functional(m, rng, s, N);
		auto [Ae, Ao] = A.parity_parts();
		auto [Be, Bo] = B.parity_parts();
		for (auto const *aa : {&Ae, &Ao})
			for (auto const *bb : {&Be, &Bo}) {
				if (aa->is_zero() || bb->is_zero())
					continue;
				std::vector<Functional const *> ab{aa, bb}, ba{bb, aa};
				int sgn = (aa->parity().value_or(0) && bb->parity().value_or(0)) ? -1 : 1;
				auto l = fam.Tn(ab);
				auto r = fam.Tn(ba);
				CHECK(l == (sgn < 0 ? -r : r));
			}
	}

	// three-fold binary product of site-disjoint locals equals the family map
	{
		auto F1 = tst::sym(m, N, {{"phi", 1}, {"phi", 1}});
		auto F2 = tst::sym(m, N, {{"phi", 2}, {"phi", 2}, {"phi", 2}});
		auto F3 = tst::sym(m, N, {{"phi", 3}});
		std::vector<Functional const *> a3{&F1, &F2, &F3};
		for (auto const *f : {&toy, &fam})
			CHECK(f->Tn(a3) == f->tren_product(f->tren_product(F1, F2), F3));
	}

	// causal factorization survives any Z: counterterms need coincident sites
	auto late1 = tst::sym(m, N, {{"phi", 3}, {"phi", 3}});
	auto late2 = tst::sym(m, N, {{"phi", 4}});
	auto early = tst::sym(m, N, {{"phi", 1}, {"phi", 1}});
	std::vector<Functional const *> all{&late1, &late2, &early};
	std::vector<Functional const *> lt{&late1, &late2}, er{&early};
	CHECK(fam.Tn(all) == star(fam.Tn(lt), fam.Tn(er), m));
}

TEST_CASE("renormalized time ordering and its binary product")
{
	auto const &m = *tst::wave5().model;
	auto const &b = tst::wave5();
	TnFamily toy(m, RenMap{});
	auto fam = make_tn_family(m, b.Z);
	int N = 4;
	std::mt19937_64 rng(73);

	// toy Tren on the wave chain equals the time ordering operator on
	// multilocals (no self contractions on the chain)
	RandomSpec s;
	s.max_af = 1;
	for (int it = 0; it < 10; ++it) {
		auto F = random_functional(m, rng, s, N);
		CHECK(toy.Tren(F) == time_order(F, m));
		CHECK(toy.Tren_inv(toy.Tren(F)) == F);
		CHECK(fam.Tren_inv(fam.Tren(F)) == F);
	}

	// Z = id: the binary product coincides with .T
	auto p1 = tst::sym(m, N, {{"phi", 1}});
	auto p3 = tst::sym(m, N, {{"phi", 3}});
	CHECK(toy.tren_product(p1, p3) == tprod(p1, p3, m));

	// unit, associativity for the bundled Z
	for (int it = 0; it < 6; ++it) {
		auto F = random_functional(m, rng, s, N);
		auto G = random_functional(m, rng, s, N);
		auto H = random_functional(m, rng, s, N);
		CHECK(fam.tren_product(F, Functional::one(m.tabp(), N)) == F);
		CHECK(fam.tren_product(fam.tren_product(F, G), H) ==
		      fam.tren_product(F, fam.tren_product(G, H)));
	}

	// vector fields ride along coefficient-wise (antifields spectate)
	for (int it = 0; it < 6; ++it) {
		auto X = random_vector_field(m, rng, 3, N);
		auto TX = fam.Tren(X);
		for (int x : m.window()) {
			Gen af = pack_gen(x, m.species()[m.species().id_of("phi")].partner);
			CHECK(TX.left_derivative(af) == fam.Tren(X.left_derivative(af)));
		}
	}
}

TEST_CASE("family S-matrix composes through Z")
{
	auto const &m = *tst::wave5().model;
	auto const &b = tst::wave5();
	auto fam = make_tn_family(m, b.Z);
	PerturbativeOrders o{2, 3};
	auto V = b.func("V");

	auto lhs = fam.smatrix_hat(V, o, +1);
	auto Zs = b.Z.apply_series(V, m, o.work(), o.v);
	VSeries A = VSeries::zero(m.tabp(), o.work(), o.v);
	for (int k = 1; k <= o.v; ++k) {
		Scalar w(1);
		for (int t = 0; t < k; ++t)
			w *= Scalar::i();
		A.c[size_t(k)] = Zs.c[size_t(k)].scaled(w).shifted_hbar(-k);
	}
	auto rhs = vs_exp(A, tprod_op(m));
	CHECK(lhs == rhs);
}

TEST_CASE("anomaly anchors")
{
	auto const &m = *tst::wave5().model;
	auto const &b = tst::wave5();
	TnFamily toy(m, RenMap{});
	auto fam = make_tn_family(m, b.Z);
	PerturbativeOrders o{2, 2};
	std::mt19937_64 rng(79);

	// interaction-free anchor: anomaly(0, X) = i hbar lap X for any family
	auto zero = Functional::zero(m.tabp(), 8);
	for (int it = 0; it < 10; ++it) {
		auto X = random_vector_field(m, rng, 3, 8);
		for (auto const *f : {&toy, &fam}) {
			auto an = anomaly_extract(zero, X, *f, o);
			CHECK(an.value == ihbar_lap(X.at_trunc(o.hbar)));
		}
	}

	// toy family, cubic interaction: exact Schwinger-Dyson, no anomaly
	// beyond the free term
	auto V = b.func("V");
	auto X = b.func("X");
	auto an0 = anomaly_extract(V, X, toy, o);
	CHECK(an0.value == ihbar_lap(X.at_trunc(o.hbar)));
	// X = phi_af(2) is field independent: the anomaly vanishes outright
	CHECK(an0.value.is_zero());

	// counterterm family: nonzero local anomaly in supp X cap supp V at
	// order hbar
	auto an1 = anomaly_extract(V, X, fam, o);
	CHECK_FALSE(an1.value.is_zero());
	CHECK(an1.support == std::set<int>{2});
	REQUIRE(an1.leading_hbar_order.has_value());
	CHECK(*an1.leading_hbar_order >= 1);
	// linearity in the probe
	auto an2 = anomaly_extract(V, X.scaled(Scalar(3)), fam, o);
	CHECK(an2.value == an1.value.scaled(Scalar(3)));
}

TEST_CASE("renormalized master equation and BV operator")
{
	auto const &m = *tst::wave5().model;
	auto const &b = tst::wave5();
	TnFamily toy(m, RenMap{});
	auto fam = make_tn_family(m, b.Z);
	PerturbativeOrders o{2, 2};
	std::mt19937_64 rng(83);

	// scalar interactions solve the equation for any family
	auto V = b.func("V");
	CHECK(qme_ren_residual(V, toy, o).is_zero());
	CHECK(qme_ren_residual(V, fam, o).is_zero());

	// V = 0: the operator is the free quantum Koszul pairing; and the two
	// displayed forms of the operator agree
	for (int it = 0; it < 6; ++it) {
		auto X = random_vector_field(m, rng, 2, 8);
		auto lhs = qbv_ren(X, Functional::zero(m.tabp(), 8), fam, o);
		auto rhs = finish(bracket_eom(X.at_trunc(o.work()), m, star_op(m)), o, "rhs");
		CHECK(lhs == rhs);

		auto an = anomaly_extract(V, X, fam, o);
		VSeries cls = VSeries::zero(m.tabp(), o.work(), o.v);
		cls.c[0] = fam.bracket_tren_eom(X.at_trunc(o.work()));
		if (o.v >= 1)
			cls.c[1] = fam.bracket_tren(X.at_trunc(o.work()), V.at_trunc(o.work()));
		auto direct = qbv_ren_series(X, V, fam, o);
		CHECK((cls - an.series) == direct);
	}

	// nilpotency and R_V intertwining at a master-equation solution
	for (int it = 0; it < 4; ++it) {
		auto X = random_vector_field(m, rng, 2, 8);
		auto sX = qbv_ren_series(X, V, fam, o);
		CHECK(qbv_ren_series_v(sX, V, fam, o).is_zero());
		auto lhs = rv_ren_series_v(V, sX, fam, o);
		auto rX = rv_ren_series(V, X, fam, o);
		VSeries rhs = VSeries::zero(m.tabp(), o.work(), o.v);
		for (int k = 0; k <= o.v; ++k)
			rhs.c[size_t(k)] = bracket_eom(rX.c[size_t(k)], m, star_op(m));
		CHECK(lhs == rhs);
	}
}

TEST_CASE("Wess-Zumino consistency at first order")
{
	auto const &m = *tst::wave5().model;
	auto const &b = tst::wave5();
	auto fam = make_tn_family(m, b.Z);
	PerturbativeOrders o{2, 2};
	std::mt19937_64 rng(89);
	auto V = b.func("V");

	RandomSpec s;
	s.kinetic_sector_only = true;
	s.max_af = 0;
	s.max_degree = 3;
	for (int it = 0; it < 5; ++it) {
		// af-0 window functionals are s-closed for a scalar interaction
		auto X = random_functional(m, rng, s, 8);
		CHECK(fam.bracket_tren_eom(X.at_trunc(o.work())).is_zero());
		auto an = anomaly_extract(V, X, fam, o);
		// {anomaly, V+S0}_Tren = -anomaly(anomaly), order by order
		VSeries lhs = VSeries::zero(m.tabp(), o.work(), o.v);
		for (int k = 0; k <= o.v; ++k) {
			if (an.series.c[size_t(k)].is_zero())
				continue;
			lhs.c[size_t(k)] += fam.bracket_tren_eom(an.series.c[size_t(k)]);
			if (k + 1 <= o.v)
				lhs.c[size_t(k + 1)] +=
				    fam.bracket_tren(an.series.c[size_t(k)], V.at_trunc(o.work()));
		}
		VSeries rhs = VSeries::zero(m.tabp(), o.work(), o.v);
		for (int k = 0; k <= o.v; ++k) {
			if (an.series.c[size_t(k)].is_zero())
				continue;
			auto inner = anomaly_extract(V, an.series.c[size_t(k)], fam, o);
			for (int j = 0; k + j <= o.v; ++j)
				rhs.c[size_t(k + j)] -= inner.series.c[size_t(j)];
		}
		CHECK(lhs == rhs);
	}
}

TEST_CASE("anomaly absorption")
{
	auto const &m = *tst::wave5().model;
	auto const &b = tst::wave5();
	auto fam = make_tn_family(m, b.Z);
	TnFamily toy(m, RenMap{});
	PerturbativeOrders o{2, 3};

	// anomaly-free case: W = S1 unchanged
	auto V = b.func("V");
	auto triv = absorb_anomaly(V, toy, o);
	CHECK(triv.absorbed);
	CHECK(triv.W == V.at_trunc(o.hbar));

	// the bundled fixture plants a first-order class in the image of the
	// classical BV operator: S1 = V + hbar phi_af c, whose residual at
	// order hbar is s(phi_af c) != 0 and Wess-Zumino closed
	auto S1 = b.func("S1");
	{
		auto r1 = qme_ren_residual_series(S1, toy, o).sum();
		Functional lead(m.tabp(), o.work());
		for (auto const &[mo, c] : r1.terms())
			if (!c.coeff(1).is_zero())
				lead.add_term(mo, c.coeff(1), 1);
		CHECK_FALSE(lead.is_zero());
	}
	auto res = absorb_anomaly(S1, toy, o);
	CHECK(res.absorbed);
	CHECK(qme_ren_residual(res.W, toy, o).is_zero());
	// the solver returns exactly the planted correction
	Functional planted(m.tabp(), o.hbar);
	{
		Monomial mo;
		int a = m.species().id_of("phi");
		mo.f.emplace_back(pack_gen(2, m.species().id_of("c")), 1);
		mo.f.emplace_back(pack_gen(2, m.species()[a].partner), 1);
		planted.add_term(mo, Scalar(1), 1);
	}
	CHECK(res.W - S1.at_trunc(o.hbar) == planted);

	// with the counterterm kernels the same action acquires an anomaly
	// class with no preimage in the configured local space: reported, not
	// silently zeroed
	auto res2 = absorb_anomaly(S1, fam, o);
	CHECK_FALSE(res2.absorbed);
	CHECK_FALSE(res2.obstruction.is_zero());
	CHECK(res2.failed_order == 1);

	// restricting the degree knob below the planted correction obstructs
	// the toy case too: the degree-1 image of the classical BV operator
	// vanishes here
	AbsorbConfig tight;
	tight.degree = 1;
	auto res3 = absorb_anomaly(S1, toy, o, tight);
	CHECK_FALSE(res3.absorbed);
	CHECK_FALSE(res3.obstruction.is_zero());

	// the correction is realizable as a same-site kernel map when the
	// linear fit succeeds; its absence is data, not an error
	auto zfit = z_fit_correction(S1.at_trunc(o.hbar), res.W, m, o);
	if (zfit)
		CHECK(zfit->apply(S1.at_trunc(o.hbar), m) == res.W);
}

TEST_CASE("renormalization group covariance and the adiabatic residual")
{
	auto const &m = *tst::wave7().model;
	auto const &b = tst::wave7();
	auto fam = make_tn_family(m, b.Z);
	PerturbativeOrders o{2, 2};
	std::mt19937_64 rng(97);

	auto L0 = free_lagrangian(m, rng);
	auto L1 = density_lagrangian(m, b.densities.at("L1"), rng);

	auto rep = rg_covariance_check(L0, L1, fam, o, rng, 2);
	CHECK(rep.support_ok);
	CHECK(rep.intertwining_ok);

	// identity map: both checks trivially pass
	TnFamily toy(m, RenMap{});
	auto rep0 = rg_covariance_check(L0, L1, toy, o, rng, 2);
	CHECK(rep0.all());

	auto rep2 = adiabatic_qme_check(L0, L1, fam, o, rng, 2);
	CHECK(rep2.support_ok);
	CHECK(rep2.form_ok);

	// vanishing interaction: the extended residual is identically zero
	auto Lz = make_lagrangian(
	    m, 1,
	    [&](std::vector<std::vector<Scalar>> const &fs, int trunc) {
		    (void)fs;
		    return Functional::zero(m.tabp(), trunc);
	    },
	    rng);
	auto rep3 = adiabatic_qme_check(L0, Lz, fam, o, rng, 2);
	CHECK(rep3.all());
}
