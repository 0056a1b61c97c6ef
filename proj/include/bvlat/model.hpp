#pragma once

#include <memory>
#include <set>

#include "bvlat/functional.hpp"
#include "bvlat/matrix.hpp"

namespace bvlat {

struct ModelSpec {
	int n_sites = 0;
	std::vector<int> time_order; // sites from earliest to latest; empty = ascending
	std::vector<int> window;
	std::vector<SpeciesDecl> species;
	Mat K;
	std::optional<Mat> delta_R; // solved by forward substitution when absent
	std::optional<Mat> H;       // defaults to zero
};

/// A finite causal lattice: ordered sites, a window where the Green
/// identities hold, the species table and the exact propagator package
///   Delta_A = Delta_R^t,  Delta = Delta_R - Delta_A,
///   Delta_D = (Delta_R + Delta_A)/2,  H_F = H + i*Delta_D.
class Model {
  public:
	int n_sites() const { return n_; }
	std::set<int> const &window() const { return W_; }
	bool in_window(int x) const { return W_.count(x) != 0; }
	SpeciesTable const &species() const { return tab_; }
	SpeciesTable const *tabp() const { return &tab_; }

	Mat const &K() const { return K_; }
	Mat const &delta_R() const { return DR_; }
	Mat const &delta_A() const { return DA_; }
	Mat const &delta() const { return D_; }
	Mat const &delta_D() const { return DD_; }
	Mat const &H() const { return H_; }
	Mat const &H_F() const { return HF_; }

	/// strict "x later than y" in the time order
	bool later(int x, int y) const { return pos_[size_t(x)] > pos_[size_t(y)]; }
	/// K-stencil neighbours of x, including x
	std::set<int> stencil(int x) const;
	std::set<int> grow_by_stencil(std::set<int> const &s) const;
	/// sites where the test vector differs from a K-stencil neighbour
	std::set<int> d_support(std::vector<Scalar> const &f) const;

	/// field equation (K phi_a)(x) of the kinetic species a
	Functional eom(int kinetic_sid, int x, int trunc) const;
	/// free action L0(f) = 1/2 sum_t f(t) phi(t) (K phi)(t) over all kinetic species
	Functional free_action(std::vector<Scalar> const &f, int trunc) const;

	friend Model build_model(ModelSpec const &spec);

  private:
	int n_ = 0;
	std::vector<int> pos_; // pos_[site] = position in the time order
	std::set<int> W_;
	SpeciesTable tab_;
	Mat K_, DR_, DA_, D_, DD_, H_, HF_;
};

/// Validates the spec and derives the propagator package. Rejects asymmetric
/// K, support-violating Delta_R, and window Green identity failures.
Model build_model(ModelSpec const &spec);

/// Exact forward substitution for the retarded Green function of a banded K
/// (stencil reaching one step forward/backward in the time order).
Mat retarded_green(Mat const &K, std::vector<int> const &time_order);

} // namespace bvlat
