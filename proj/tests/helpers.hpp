#pragma once

#include <random>

#include "bvlat/io.hpp"
#include "bvlat/suites.hpp"

// shared fixture plumbing for the test binaries
namespace tst {

inline bvlat::Bundle &wave5()
{
	static bvlat::Bundle b = bvlat::load_model(std::string(BVLAT_FIXTURE_DIR) + "/wave5.json");
	return b;
}

inline bvlat::Bundle &wave7()
{
	static bvlat::Bundle b = bvlat::load_model(std::string(BVLAT_FIXTURE_DIR) + "/wave7.json");
	return b;
}

inline bvlat::Gen gen(bvlat::Model const &m, std::string const &species, int site)
{
	return bvlat::pack_gen(site, m.species().id_of(species));
}

inline bvlat::Functional sym(bvlat::Model const &m, int trunc,
                             std::initializer_list<std::pair<std::string, int>> gens,
                             bvlat::Scalar c = bvlat::Scalar(1), int hbar = 0)
{
	using namespace bvlat;
	Functional F = Functional::constant(m.tabp(), trunc, Scalar(1));
	for (auto const &[name, site] : gens)
		F = F * Functional::generator(m.tabp(), trunc, gen(m, name, site));
	return F.scaled(HbarSeries::term(c, hbar, trunc));
}

} // namespace tst
