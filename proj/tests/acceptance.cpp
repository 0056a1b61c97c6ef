// Acceptance run: one line per criterion, exact arithmetic throughout.
// Exit status is nonzero when any criterion fails.

#include <chrono>
#include <cstdlib>

#include <fmt/format.h>

#include "bvlat/random_gen.hpp"
#include "bvlat/renorm.hpp"
#include "bvlat/suites.hpp"
#include "helpers.hpp"

using namespace bvlat;

namespace {

int g_failures = 0;

void criterion(int num, char const *what, double budget_s, std::function<bool()> const &run)
{
	auto t0 = std::chrono::steady_clock::now();
	bool ok = false;
	std::string err;
	try {
		ok = run();
	} catch (std::exception const &e) {
		err = e.what();
	}
	double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
	bool in_budget = secs < budget_s;
	if (!ok || !in_budget)
		++g_failures;
	fmt::print("criterion {:2}: {}  ({:.2f} s / {:.0f} s)  {}\n", num,
	           (ok && in_budget) ? "PASS" : "FAIL", secs, budget_s, what);
	if (!err.empty())
		fmt::print("              exception: {}\n", err);
	else if (!ok)
		fmt::print("              identity failed\n");
	else if (!in_budget)
		fmt::print("              budget exceeded\n");
}

Functional ihbar(Functional const &F)
{
	return F.scaled(HbarSeries::term(Scalar::i(), 1, F.trunc()));
}

} // namespace

int main()
{
	auto &w5 = tst::wave5();
	auto &w7 = tst::wave7();
	auto const &m5 = *w5.model;
	auto const &m7 = *w7.model;

	criterion(1, "exact star and time-ordered pair values on the 5-site chain", 1.0, [&] {
		int N = 3;
		auto p1 = tst::sym(m5, N, {{"phi", 1}});
		auto p3 = tst::sym(m5, N, {{"phi", 3}});
		auto prod = p1 * p3;
		auto want_star = prod;
		want_star.add_term(Monomial{}, -Scalar::i(), 1);
		auto want_t = prod;
		want_t.add_term(Monomial{}, Scalar::i(), 1);
		return star(p1, p3, m5) == want_star && tprod(p1, p3, m5) == want_t;
	});

	criterion(2, "Laplacian nilpotency on 200 seeded graded functionals", 10.0, [&] {
		std::mt19937_64 rng(1001);
		RandomSpec s;
		s.max_af = 3;
		s.max_degree = 4;
		for (int it = 0; it < 200; ++it) {
			auto Q = random_functional(m7, rng, s, 3);
			if (!bv_laplacian(bv_laplacian(Q)).is_zero())
				return false;
		}
		return true;
	});

	criterion(3, "bracket defect identities on 100 random pairs each", 30.0, [&] {
		std::mt19937_64 rng(1002);
		RandomSpec s;
		s.max_af = 2;
		s.max_degree = 3;
		s.max_terms = 3;
		int const N = 3;
		for (int it = 0; it < 100; ++it) {
			auto P = random_functional(m7, rng, s, N);
			auto Q = random_functional(m7, rng, s, N);
			for (auto mode :
			     {BracketMode::geometric, BracketMode::timeordered, BracketMode::star})
				if (!(antibracket(P, Q, m7, mode) == antibracket_defect(P, Q, m7, mode)))
					return false;
			// Laplacian-bracket compatibility on the homogeneous parts
			auto [Pe, Po] = P.parity_parts();
			for (int pa = 0; pa < 2; ++pa) {
				auto const &Pp = pa ? Po : Pe;
				if (Pp.is_zero())
					continue;
				auto lhs = bv_laplacian(antibracket(Pp, Q, m7, BracketMode::geometric));
				auto rhs = -antibracket(bv_laplacian(Pp), Q, m7, BracketMode::geometric);
				auto t = antibracket(Pp, bv_laplacian(Q), m7, BracketMode::geometric);
				rhs -= (pa ? -t : t);
				if (!(lhs == rhs))
					return false;
			}
		}
		return true;
	});

	criterion(4, "windowed Schwinger-Dyson identities on 100 random fields", 10.0, [&] {
		std::mt19937_64 rng(1003);
		for (int it = 0; it < 100; ++it) {
			auto X = random_vector_field(m7, rng, 3, 3);
			if (!(ihbar(bv_laplacian(X)) ==
			      bracket_eom(X, m7, tprod_op(m7)) - bracket_eom(X, m7, star_op(m7))))
				return false;
			if (!(bracket_eom(X, m7, pointwise_op()) == bracket_eom(X, m7, star_op(m7))))
				return false;
		}
		return true;
	});

	criterion(5, "quantum Koszul derivation defect on 100 random pairs", 10.0, [&] {
		std::mt19937_64 rng(1004);
		RandomSpec s;
		s.kinetic_sector_only = true;
		s.max_af = 1;
		s.max_degree = 3;
		for (int it = 0; it < 100; ++it) {
			auto X = random_functional(m7, rng, s, 3);
			auto Y = random_functional(m7, rng, s, 3);
			auto [Xe, Xo] = X.parity_parts();
			for (int pa = 0; pa < 2; ++pa) {
				auto const &Xp = pa ? Xo : Xe;
				if (Xp.is_zero())
					continue;
				auto lhs = bracket_eom(tprod(Xp, Y, m7), m7, star_op(m7)) -
				           tprod(bracket_eom(Xp, m7, star_op(m7)), Y, m7);
				auto t = tprod(Xp, bracket_eom(Y, m7, star_op(m7)), m7);
				lhs -= (pa ? -t : t);
				auto rhs = -ihbar(antibracket(Xp, Y, m7, BracketMode::timeordered));
				if (!(lhs == rhs))
					return false;
			}
		}
		return true;
	});

	criterion(6, "product structure: intertwining, symmetry, causal factorization", 30.0, [&] {
		std::mt19937_64 rng(1005);
		RandomSpec s;
		s.max_af = 1;
		s.max_degree = 3;
		s.max_terms = 2;
		int const N = 3;
		TnFamily toy(m5, RenMap{});
		auto fam = make_tn_family(m5, w5.Z);
		for (int it = 0; it < 50; ++it) {
			auto F = random_functional(m5, rng, s, N);
			auto G = random_functional(m5, rng, s, N);
			auto H = random_functional(m5, rng, s, N);
			if (!(time_order(F * G, m5) ==
			      tprod(time_order(F, m5), time_order(G, m5), m5)))
				return false;
			if (!(tprod(tprod(F, G, m5), H, m5) == tprod(F, tprod(G, H, m5), m5)))
				return false;
			auto *f = (it % 2) ? &fam : &toy; // includes a nontrivial Z
			if (!(f->tren_product(f->tren_product(F, G), H) ==
			      f->tren_product(F, f->tren_product(G, H))))
				return false;
			auto [Fe, Fo] = F.parity_parts();
			auto [Ge, Go] = G.parity_parts();
			for (auto const *ff : {&Fe, &Fo})
				for (auto const *gg : {&Ge, &Go}) {
					if (ff->is_zero() || gg->is_zero())
						continue;
					int sg = (ff->parity().value_or(0) &&
					          gg->parity().value_or(0))
					             ? -1
					             : 1;
					auto a = tprod(*ff, *gg, m5);
					auto b = tprod(*gg, *ff, m5);
					if (!(a == (sg < 0 ? -b : b)))
						return false;
					auto c = f->tren_product(*ff, *gg);
					auto d = f->tren_product(*gg, *ff);
					if (!(c == (sg < 0 ? -d : d)))
						return false;
				}
		}
		// time-separated pairs factorize through the star product
		std::uniform_int_distribution<int> cut(1, m7.n_sites() - 1);
		std::uniform_int_distribution<int> deg(1, 3);
		int a0 = m7.species().id_of("phi");
		for (int it = 0; it < 50; ++it) {
			int k = cut(rng);
			std::uniform_int_distribution<int> lo(0, k - 1), hi(k, m7.n_sites() - 1);
			Functional F(m7.tabp(), N), G(m7.tabp(), N);
			Monomial mF, mG;
			mF.f.emplace_back(pack_gen(hi(rng), a0), uint32_t(deg(rng)));
			mG.f.emplace_back(pack_gen(lo(rng), a0), uint32_t(deg(rng)));
			F.add_term(mF, Scalar(2));
			G.add_term(mG, Scalar(3));
			if (!(tprod(F, G, m7) == star(F, G, m7)))
				return false;
		}
		return true;
	});

	criterion(7, "multiplication bijection on 50 random multilocals of rank <= 3", 20.0, [&] {
		std::mt19937_64 rng(1006);
		RandomSpec s;
		s.max_af = 2;
		s.max_degree = 3;
		int checked = 0;
		for (int it = 0; checked < 50 && it < 500; ++it) {
			auto F = random_functional(m7, rng, s, 3);
			MultilocalTensor T;
			try {
				T = beta_decompose(F, 3);
			} catch (domain_error const &) {
				continue; // a term touched more than three sites
			}
			++checked;
			if (!(tensor_multiply(T) == F))
				return false;
			if (!(beta_decompose(tensor_multiply(T), 3).comp == T.comp))
				return false;
		}
		return checked >= 50;
	});

	criterion(8, "free BRST bracket exchange on the graded pair model at orders (3,3)", 10.0,
	          [&] {
		          PerturbativeOrders o{3, 3};
		          std::mt19937_64 rng(1007);
		          RandomSpec s;
		          s.max_af = 1;
		          s.max_degree = 2;
		          auto theta0 = w5.func("theta0");
		          auto V = w5.func("V");
		          for (int it = 0; it < 8; ++it) {
			          auto X = random_functional(m5, rng, s, 8);
			          auto [ok, res] = theta_identity_check(V, X, theta0, m5, o);
			          if (!ok || !res.is_zero())
				          return false;
		          }
		          return true;
	          });

	criterion(9, "anomaly anchors: free term, toy vanishing, counterterm class", 60.0, [&] {
		PerturbativeOrders o{2, 2};
		std::mt19937_64 rng(1008);
		TnFamily toy(m5, RenMap{});
		auto fam = make_tn_family(m5, w5.Z);
		auto zero = Functional::zero(m5.tabp(), w5.store_trunc);
		for (int it = 0; it < 50; ++it) {
			auto X = random_vector_field(m5, rng, 3, w5.store_trunc);
			auto an = anomaly_extract(zero, X, fam, o);
			if (!(an.value == ihbar(bv_laplacian(X.at_trunc(o.hbar)))))
				return false;
		}
		auto V = w5.func("V");
		auto X = w5.func("X");
		if (!anomaly_extract(V, X, toy, o).value.is_zero())
			return false;
		auto an = anomaly_extract(V, X, fam, o);
		if (an.value.is_zero())
			return false;
		if (!an.leading_hbar_order || *an.leading_hbar_order < 1)
			return false;
		for (int x : an.support)
			if (!X.support().count(x) || !V.support().count(x))
				return false;
		return true;
	});

	criterion(10, "renormalized BV operator: nilpotency and intertwining at (3,3)", 60.0, [&] {
		PerturbativeOrders o{3, 3};
		std::mt19937_64 rng(1009);
		auto fam = make_tn_family(m5, w5.Z);
		auto V = w5.func("V");
		if (!qme_ren_residual(V, fam, o).is_zero())
			return false;
		for (int it = 0; it < 20; ++it) {
			auto X = random_vector_field(m5, rng, 2, w5.store_trunc);
			auto sX = qbv_ren_series(X, V, fam, o);
			if (!qbv_ren_series_v(sX, V, fam, o).is_zero())
				return false;
			auto lhs = rv_ren_series_v(V, sX, fam, o);
			auto rX = rv_ren_series(V, X, fam, o);
			VSeries rhs = VSeries::zero(m5.tabp(), o.work(), o.v);
			for (int k = 0; k <= o.v; ++k)
				rhs.c[size_t(k)] = bracket_eom(rX.c[size_t(k)], m5, star_op(m5));
			if (!(lhs == rhs))
				return false;
		}
		return true;
	});

	criterion(11, "consistency condition at first order for closed arguments", 10.0, [&] {
		PerturbativeOrders o{2, 2};
		std::mt19937_64 rng(1010);
		auto fam = make_tn_family(m5, w5.Z);
		auto V = w5.func("V");
		RandomSpec s;
		s.kinetic_sector_only = true;
		s.max_af = 0;
		s.max_degree = 3;
		for (int it = 0; it < 5; ++it) {
			auto X = random_functional(m5, rng, s, w5.store_trunc);
			if (!fam.bracket_tren_eom(X.at_trunc(o.work())).is_zero())
				return false; // closed by construction here
			auto an = anomaly_extract(V, X, fam, o);
			VSeries lhs = VSeries::zero(m5.tabp(), o.work(), o.v);
			VSeries rhs = VSeries::zero(m5.tabp(), o.work(), o.v);
			for (int k = 0; k <= o.v; ++k) {
				if (an.series.c[size_t(k)].is_zero())
					continue;
				lhs.c[size_t(k)] += fam.bracket_tren_eom(an.series.c[size_t(k)]);
				if (k + 1 <= o.v)
					lhs.c[size_t(k + 1)] += fam.bracket_tren(
					    an.series.c[size_t(k)], V.at_trunc(o.work()));
				auto inner = anomaly_extract(V, an.series.c[size_t(k)], fam, o);
				for (int j = 0; k + j <= o.v; ++j)
					rhs.c[size_t(k + j)] -= inner.series.c[size_t(j)];
			}
			// first order in hbar of the lambda-sum
			auto diff = lhs.sum() - rhs.sum();
			for (auto const &[mo, c] : diff.terms())
				if (!c.coeff(1).is_zero())
					return false;
		}
		return true;
	});

	criterion(12, "renormalization group covariance at orders (2,2)", 60.0, [&] {
		PerturbativeOrders o{2, 2};
		std::mt19937_64 rng(1011);
		auto fam = make_tn_family(m7, w7.Z);
		auto L0 = free_lagrangian(m7, rng);
		auto L1 = density_lagrangian(m7, w7.densities.at("L1"), rng);
		auto rep = rg_covariance_check(L0, L1, fam, o, rng, 3);
		return rep.all();
	});

	criterion(13, "regularized master equation forms at three scales", 30.0, [&] {
		PerturbativeOrders o{2, 2};
		auto famL = ScaleFamily::default_family(m5);
		auto V = w5.func("V");
		auto V2 = V + w5.func("theta0");
		for (long l : {0L, 1L, 10L}) {
			Mat h = famL.at(mpq_class(l));
			for (auto const *W : {&V, &V2}) {
				auto three = qme_residual_scale_series(*W, m5, o, h);
				auto route = qme_bracket_route_scale(*W, m5, o, h);
				auto scaled = vs_map(three, [&](Functional const &F) {
					return F.scaled(Scalar::i()).shifted_hbar(-1);
				});
				if (!(route == scaled))
					return false;
			}
		}
		return true;
	});

	criterion(14, "anomaly absorption: planted class recovered, obstruction reported", 60.0,
	          [&] {
		          PerturbativeOrders o{2, 3};
		          TnFamily toy(m5, RenMap{});
		          auto fam = make_tn_family(m5, w5.Z);
		          auto S1 = w5.func("S1");
		          auto res = absorb_anomaly(S1, toy, o);
		          if (!res.absorbed || !qme_ren_residual(res.W, toy, o).is_zero())
			          return false;
		          // exact recovery of the planted correction
		          Functional planted(m5.tabp(), o.hbar);
		          Monomial mo;
		          int a = m5.species().id_of("phi");
		          mo.f.emplace_back(pack_gen(2, m5.species().id_of("c")), 1);
		          mo.f.emplace_back(pack_gen(2, m5.species()[a].partner), 1);
		          planted.add_term(mo, Scalar(1), 1);
		          if (!(res.W - S1.at_trunc(o.hbar) == planted))
			          return false;
		          auto res2 = absorb_anomaly(S1, fam, o);
		          return !res2.absorbed && !res2.obstruction.is_zero() &&
		                 res2.failed_order == 1;
	          });

	criterion(15, "full identity run on the 7-site model at orders (3,3)", 300.0, [&] {
		std::string cmd = std::string(BVLAT_CHECK_BIN) + " check --model " +
		                  BVLAT_FIXTURE_DIR +
		                  "/wave7.json --suite all --hbar-order 3 --v-order 3 --seed 1 "
		                  "> /dev/null";
		return std::system(cmd.c_str()) == 0;
	});

	fmt::print("{}\n", g_failures == 0 ? "all criteria passed" : "criteria FAILED");
	return g_failures == 0 ? 0 : 1;
}
