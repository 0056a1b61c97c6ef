#include <fstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "bvlat/suites.hpp"

int main(int argc, char **argv)
{
	CLI::App app{"bvlat: exact identity checker for lattice Batalin-Vilkovisky structures"};
	argv = app.ensure_utf8(argv);

	std::string model_path;
	std::string suite = "all";
	std::string report_path;
	std::string lambda_extra;
	bvlat::SuiteConfig cfg;

	auto *check = app.add_subcommand("check", "run identity suites on a model file");
	check->add_option("--model", model_path, "model file (JSON)")->required();
	check->add_option("--suite", suite, "suite name or 'all'");
	check->add_option("--hbar-order", cfg.hbar_order, "hbar truncation order");
	check->add_option("--v-order", cfg.v_order, "interaction truncation order");
	check->add_option("--seed", cfg.seed, "random seed");
	check->add_option("--samples", cfg.samples, "sample count override");
	check->add_option("--report", report_path, "write the JSON report here");
	check->add_option("--lambda", lambda_extra, "extra scale parameter (rational)");
	app.require_subcommand(1);

	try {
		app.parse(argc, argv);
	} catch (CLI::ParseError const &e) {
		int code = app.exit(e);
		return code == 0 ? 0 : 2;
	}

	if (cfg.hbar_order < 0 || cfg.v_order < 0) {
		fmt::print(stderr, "orders must be non-negative\n");
		return 2;
	}
	bool known = suite == "all";
	for (auto const &s : bvlat::suite_names())
		known = known || s == suite;
	if (!known) {
		fmt::print(stderr, "unknown suite '{}'; expected one of all", suite);
		for (auto const &s : bvlat::suite_names())
			fmt::print(stderr, "|{}", s);
		fmt::print(stderr, "\n");
		return 2;
	}
	cfg.suites = {suite};
	if (!lambda_extra.empty()) {
		try {
			mpq_class q;
			if (q.set_str(lambda_extra, 10) != 0)
				throw std::runtime_error("bad rational");
			q.canonicalize();
			cfg.lambdas.push_back(q);
		} catch (std::exception const &) {
			fmt::print(stderr, "--lambda expects a rational like 3/2\n");
			return 2;
		}
	}

	bvlat::Bundle bundle;
	try {
		bundle = bvlat::load_model(model_path);
	} catch (std::exception const &e) {
		fmt::print(stderr, "load error: {}\n", e.what());
		return 2;
	}

	auto outcomes = bvlat::run_suites(bundle, cfg);
	bool ok = true;
	for (auto const &o : outcomes) {
		ok = ok && o.pass;
		fmt::print("[{}] {:<55} {} {} ({:.0f} ms)\n", o.suite, o.name, o.anchor,
		           o.pass ? "pass" : "FAIL", o.ms);
		if (!o.pass)
			fmt::print("    {}\n", o.counterexample);
	}
	fmt::print("{} checks, {} failed\n", outcomes.size(),
	           std::count_if(outcomes.begin(), outcomes.end(),
	                         [](auto const &o) { return !o.pass; }));
	if (!report_path.empty()) {
		std::ofstream out(report_path);
		if (!out) {
			fmt::print(stderr, "cannot write report to {}\n", report_path);
			return 2;
		}
		out << bvlat::report_json(outcomes);
		std::ofstream md(report_path + ".md");
		md << bvlat::report_markdown(outcomes);
	}
	return ok ? 0 : 1;
}
