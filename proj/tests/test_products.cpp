#include <doctest.h>

#include "bvlat/products.hpp"
#include "bvlat/random_gen.hpp"
#include "helpers.hpp"

using namespace bvlat;

TEST_CASE("star product basics")
{
	auto const &m = *tst::wave5().model;
	int N = 3;
	auto p1 = tst::sym(m, N, {{"phi", 1}});
	auto p3 = tst::sym(m, N, {{"phi", 3}});

	// phi(1)*phi(3) = phi(1)phi(3) - i hbar on the 5-site wave chain
	auto lhs = star(p1, p3, m);
	auto want = p1 * p3;
	want.add_term(Monomial{}, -Scalar::i(), 1);
	CHECK(lhs == want);

	// unit
	CHECK(star(Functional::one(m.tabp(), N), p1, m) == p1);

	// Peierls bracket: [phi(1),phi(3)]_* = i hbar Delta(1,3) = -2 i hbar
	auto comm = star(p1, p3, m) - star(p3, p1, m);
	Functional peierls(m.tabp(), N);
	peierls.add_term(Monomial{}, Scalar::i() * m.delta().at(1, 3), 1);
	CHECK(comm == peierls);
}

TEST_CASE("star commutator is the Peierls bracket at first order")
{
	auto const &m = *tst::wave5().model;
	int N = 3;
	std::mt19937_64 rng(13);
	RandomSpec s;
	s.kinetic_sector_only = true;
	s.max_af = 0;
	s.complex_coeffs = false;
	int a0 = m.species().id_of("phi");
	for (int it = 0; it < 20; ++it) {
		auto F = random_functional(m, rng, s, N);
		auto G = random_functional(m, rng, s, N);
		auto comm = star(F, G, m) - star(G, F, m);
		// independent contraction: i hbar sum F'(x) Delta(x,y) G'(y)
		Functional peierls(m.tabp(), N);
		for (int x = 0; x < m.n_sites(); ++x)
			for (int y = 0; y < m.n_sites(); ++y) {
				if (m.delta().at(x, y).is_zero())
					continue;
				auto t = F.left_derivative(pack_gen(x, a0)) *
				         G.left_derivative(pack_gen(y, a0));
				peierls += t.scaled(m.delta().at(x, y));
			}
		Functional comm1(m.tabp(), N);
		for (auto const &[mo, c] : comm.terms())
			if (!c.coeff(1).is_zero())
				comm1.add_term(mo, c.coeff(1));
		Functional want(m.tabp(), N);
		auto ip = peierls.scaled(Scalar::i());
		for (auto const &[mo, c] : ip.terms())
			want.add_term(mo, c.coeff(0));
		CHECK(comm1 == want);
	}
}

TEST_CASE("surviving negative powers are an error, not a truncation")
{
	auto const &m = *tst::wave5().model;
	PerturbativeOrders o{2, 2};
	auto bad = tst::sym(m, o.work(), {{"phi", 2}}).shifted_hbar(-1);
	CHECK_FALSE(bad.hbar_regular());
	CHECK_THROWS_AS(finish(bad, o, "probe"), domain_error);
}

TEST_CASE("time-ordered product and operator")
{
	auto const &m = *tst::wave5().model;
	int N = 3;
	auto p1 = tst::sym(m, N, {{"phi", 1}});
	auto p2 = tst::sym(m, N, {{"phi", 2}});
	auto p3 = tst::sym(m, N, {{"phi", 3}});

	// phi(1) .T phi(3) = phi(1)phi(3) + i hbar
	auto lhs = tprod(p1, p3, m);
	auto want = p1 * p3;
	want.add_term(Monomial{}, Scalar::i(), 1);
	CHECK(lhs == want);
	// causal factorization instance: equals phi(3) * phi(1), later factor left
	CHECK(lhs == star(p3, p1, m));
	CHECK(tprod(p1, Functional::one(m.tabp(), N), m) == p1);

	// T(phi(2)) = phi(2); T(phi(1)phi(3)) = phi(1)phi(3) + i hbar
	CHECK(time_order(p2, m) == p2);
	CHECK(time_order(p1 * p3, m) == want);
	// inverse law on a quartic
	auto F = tst::sym(m, N, {{"phi", 1}, {"phi", 2}, {"phi", 2}, {"phi", 3}});
	CHECK(time_order(time_order(F, m), m, true) == F);
}

TEST_CASE("normal-ordered star product")
{
	// H == 1 everywhere: phi(1) *_H phi(3) = phi(1)phi(3) + (i hbar/2)Delta(1,3) + hbar
	ModelSpec s;
	s.n_sites = 5;
	s.window = {1, 2, 3};
	s.species.push_back({"phi", false, 0, true});
	s.K = tst::wave5().model->K();
	Mat H(5);
	for (auto &v : H.a)
		v = Scalar(1);
	s.H = H;
	auto m = build_model(s);
	int N = 3;
	auto p1 = tst::sym(m, N, {{"phi", 1}});
	auto p3 = tst::sym(m, N, {{"phi", 3}});
	auto lhs = star_H(p1, p3, m);
	auto want = star(p1, p3, m);
	want.add_term(Monomial{}, Scalar(1), 1);
	CHECK(lhs == want);

	// H = 0 model: star_H coincides with star
	auto const &m0 = *tst::wave5().model;
	std::mt19937_64 rng(5);
	RandomSpec rs;
	for (int it = 0; it < 10; ++it) {
		auto F = random_functional(m0, rng, rs, N);
		auto G = random_functional(m0, rng, rs, N);
		CHECK(star_H(F, G, m0) == star(F, G, m0));
	}
}

TEST_CASE("smatrix expansion")
{
	auto const &m = *tst::wave5().model;
	PerturbativeOrders o{2, 2};
	auto p2 = tst::sym(m, o.work(), {{"phi", 2}});

	auto S = smatrix(tst::sym(m, 8, {{"phi", 2}}), m, o);
	// V = phi(2): 1 + phi(2) + phi(2)^2/2 (no self contraction on the chain)
	auto want = Functional::one(m.tabp(), o.hbar) + p2.at_trunc(o.hbar) +
	            (p2 * p2).at_trunc(o.hbar).scaled(Scalar::rational(1, 2));
	CHECK(S == want);

	CHECK(smatrix(Functional::zero(m.tabp(), 8), m, o) == Functional::one(m.tabp(), o.hbar));

	// V = phi(1)+phi(3) at orders (1,2): cross contraction i hbar Delta_D(1,3)
	auto V13 = tst::sym(m, 8, {{"phi", 1}}) + tst::sym(m, 8, {{"phi", 3}});
	PerturbativeOrders o12{1, 2};
	auto S13 = smatrix(V13, m, o12);
	auto v = V13.at_trunc(o12.work());
	auto expect = Functional::one(m.tabp(), o12.work()) + v +
	              (v * v).scaled(Scalar::rational(1, 2));
	// contractions inside v .T v: Delta_D(1,3) twice, diagonal entries vanish
	expect.add_term(Monomial{}, Scalar::i() * m.delta_D().at(1, 3), 1);
	CHECK(S13 == expect.at_trunc(1));

	// out-of-window support is rejected
	CHECK_THROWS_AS(smatrix(tst::sym(m, 8, {{"phi", 0}}), m, o), support_error);
}

TEST_CASE("bogoliubov map")
{
	auto const &m = *tst::wave5().model;
	PerturbativeOrders o{2, 2};
	auto V = tst::wave5().func("V");
	auto F = tst::sym(m, 8, {{"phi", 3}});
	CHECK(bogoliubov_smatrix(Functional::zero(m.tabp(), 8), F, m, o) == smatrix(F, m, o));
	CHECK(bogoliubov_smatrix(V, Functional::zero(m.tabp(), 8), m, o) ==
	      Functional::one(m.tabp(), o.hbar));
}

TEST_CASE("retarded map")
{
	auto const &m = *tst::wave5().model;
	auto V = tst::wave5().func("V");
	PerturbativeOrders o{2, 2};
	std::mt19937_64 rng(17);
	RandomSpec rs;
	rs.kinetic_sector_only = true;
	rs.max_af = 1;

	CHECK(retarded_map(Functional::zero(m.tabp(), 8), tst::sym(m, 8, {{"phi", 2}}), m, o) ==
	      tst::sym(m, o.hbar, {{"phi", 2}}));

	for (int it = 0; it < 5; ++it) {
		auto F = random_functional(m, rng, rs, o.work());
		auto r = retarded_map_series(V, F, m, o);
		auto Ep = exp_iv_over_hbar(V, m, o, +1);
		auto Em = exp_iv_over_hbar(V, m, o, -1);
		auto back = vs_mul(Em, vs_mul(Ep, r, star_op(m)), tprod_op(m));
		VSeries want = VSeries::zero(m.tabp(), o.work(), o.v);
		want.c[0] = F;
		CHECK(back == want);
	}

	// order-by-order oracle: the lambda^1 term is (i/hbar)[(V .T F) - (V * F)],
	// here with V = phi(2)^3/6 and F = phi(3)
	auto F3 = tst::sym(m, 8, {{"phi", 3}}).at_trunc(o.work());
	auto r = retarded_map_series(V, F3, m, o);
	auto Vw = V.at_trunc(o.work());
	auto direct = (tprod(Vw, F3, m) - star(Vw, F3, m)).scaled(Scalar::i()).shifted_hbar(-1);
	CHECK(r.c[1] == direct);
	// the correction is a retarded response between sites 2 and 3
	CHECK(r.c[1].support() == std::set<int>{2});
}

TEST_CASE("interacting star product")
{
	auto const &m = *tst::wave5().model;
	auto V = tst::wave5().func("V");
	PerturbativeOrders o{2, 2};
	auto F = tst::sym(m, 8, {{"phi", 1}});
	auto G = tst::sym(m, 8, {{"phi", 3}});
	auto one = Functional::one(m.tabp(), 8);

	CHECK(interacting_star(F, G, Functional::zero(m.tabp(), 8), m, o) ==
	      star(F, G, m).at_trunc(o.hbar).at_trunc(o.hbar));
	CHECK(interacting_star(one, F, V, m, o) == F.at_trunc(o.hbar));
	CHECK(interacting_star(F, one, V, m, o) == F.at_trunc(o.hbar));
}

TEST_CASE("vector field time ordering")
{
	auto const &m = *tst::wave5().model;
	int N = 3;
	// X = phi(1)phi(3) phi_af(2) -> (phi(1)phi(3) + i hbar) phi_af(2)
	auto X = tst::sym(m, N, {{"phi", 1}, {"phi", 3}, {"phi_af", 2}});
	auto TX = timeorder_vectorfield(X, m);
	auto want = X + tst::sym(m, N, {{"phi_af", 2}}, Scalar::i(), 1);
	CHECK(TX == want);

	// constant-in-phi fields are fixed points
	auto C = tst::sym(m, N, {{"phi_af", 2}});
	CHECK(timeorder_vectorfield(C, m) == C);

	// grading guard
	CHECK_THROWS_AS(timeorder_vectorfield(tst::sym(m, N, {{"phi", 1}}), m), grading_error);
}
