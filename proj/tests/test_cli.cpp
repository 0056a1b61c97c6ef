#include <doctest.h>

#include "helpers.hpp"

using namespace bvlat;

TEST_CASE("model loading")
{
	auto const &b = tst::wave5();
	CHECK(b.model->n_sites() == 5);
	CHECK(b.model->window() == std::set<int>{1, 2, 3});
	CHECK(b.has("V"));
	CHECK(b.has("theta0"));
	CHECK(b.func("V").support() == std::set<int>{2});
	CHECK(b.Z.kernels.size() == 1);
	CHECK(b.densities.count("L1") == 1);
	CHECK_THROWS_AS(b.func("missing"), load_error);
}

TEST_CASE("load errors carry their origin")
{
	// asymmetric K names the violated invariant
	std::string bad = R"json({
	  "sites": 2, "window": [0],
	  "species": [{"name":"phi","parity":"even","kinetic":true}],
	  "K": [["1","2"],["0","1"]]
	})json";
	CHECK_THROWS_WITH_AS(load_model_text(bad, "bad"), doctest::Contains("asymmetric"),
	                     load_error);

	std::string badgen = R"json({
	  "sites": 2, "window": [0],
	  "species": [{"name":"phi","parity":"even","kinetic":true}],
	  "K": [["1","0"],["0","1"]],
	  "functionals": {"V": [{"coeff": "1", "gens": ["phi(9)"]}]}
	})json";
	CHECK_THROWS_WITH_AS(load_model_text(badgen, "badgen"), doctest::Contains("site out of range"),
	                     load_error);

	std::string badq = R"json({
	  "sites": 2, "window": [0],
	  "species": [{"name":"phi","parity":"even","kinetic":true}],
	  "K": [["1","0"],["0","x"]]
	})json";
	CHECK_THROWS_AS(load_model_text(badq, "badq"), load_error);

	// H defaults to zero and the file is accepted without it
	CHECK(tst::wave5().model->H() == Mat(5));
}

TEST_CASE("suite runner")
{
	SuiteConfig cfg;
	cfg.suites = {"algebra"};
	cfg.hbar_order = 2;
	cfg.v_order = 2;
	cfg.seed = 5;
	cfg.samples = 4;
	auto out = run_suites(tst::wave5(), cfg);
	REQUIRE(!out.empty());
	for (auto const &o : out) {
		CHECK(o.pass);
		CHECK(o.suite == "algebra");
		CHECK(!o.anchor.empty());
	}
	// determinism given (file, seed, orders)
	auto out2 = run_suites(tst::wave5(), cfg);
	REQUIRE(out.size() == out2.size());
	for (size_t i = 0; i < out.size(); ++i)
		CHECK(out[i].pass == out2[i].pass);

	auto js = report_json(out);
	CHECK(js.find("\"suite\": \"algebra\"") != std::string::npos);
	CHECK(js.find("\"status\": \"pass\"") != std::string::npos);
	auto md = report_markdown(out);
	CHECK(md.find("| algebra |") != std::string::npos);
}
