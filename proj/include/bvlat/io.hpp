#pragma once

#include <memory>

#include "bvlat/renorm.hpp"

namespace bvlat {

/// A loaded model file: the validated lattice plus named functionals
/// (interaction "V", free BRST term "theta0", gauge fixing fermion "psi",
/// anomaly probe "X", ...), renormalization kernels and interaction
/// densities for the cutoff checks.
struct Bundle {
	std::shared_ptr<Model> model;
	int store_trunc = 8;
	std::map<std::string, Functional> funcs;
	RenMap Z;
	std::map<std::string, Density> densities;

	Functional const &func(std::string const &name) const;
	bool has(std::string const &name) const { return funcs.count(name) != 0; }
};

Bundle load_model(std::string const &path);
Bundle load_model_text(std::string const &text, std::string const &origin = "<memory>");

} // namespace bvlat
