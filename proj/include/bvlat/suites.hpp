#pragma once

#include "bvlat/io.hpp"

namespace bvlat {

struct SuiteConfig {
	std::vector<std::string> suites{"all"};
	int hbar_order = 3;
	int v_order = 3;
	uint64_t seed = 1;
	int samples = 0; // 0: per-check defaults
	std::vector<mpq_class> lambdas{mpq_class(0), mpq_class(1), mpq_class(10)};
};

struct CheckOutcome {
	std::string suite;
	std::string name;
	std::string anchor;
	bool pass = false;
	std::string counterexample;
	std::string note; // informative findings on passing checks
	double ms = 0;
};

std::vector<std::string> suite_names();

/// Runs the selected identity suites on a loaded bundle. Deterministic given
/// (bundle, seed, orders).
std::vector<CheckOutcome> run_suites(Bundle const &b, SuiteConfig const &cfg);

std::string report_json(std::vector<CheckOutcome> const &out);
std::string report_markdown(std::vector<CheckOutcome> const &out);

} // namespace bvlat
