#include "bvlat/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace bvlat {

using nlohmann::json;

namespace {

Scalar parse_scalar(json const &j, std::string const &where)
{
	try {
		if (j.is_number_integer())
			return Scalar(long(j.get<long long>()));
		if (j.is_string())
			return parse_rational(j.get<std::string>());
		if (j.is_object()) {
			Scalar re = j.contains("re") ? parse_scalar(j.at("re"), where) : Scalar(0);
			Scalar im = j.contains("im") ? parse_scalar(j.at("im"), where) : Scalar(0);
			return Scalar(re.re, im.re);
		}
	} catch (std::exception const &e) {
		throw load_error(where + ": " + e.what());
	}
	throw load_error(where + ": expected a rational (string), integer or {re,im}");
}

Mat parse_matrix(json const &j, int n, std::string const &where)
{
	if (!j.is_array() || int(j.size()) != n)
		throw load_error(where + ": expected a " + std::to_string(n) + "x" +
		                 std::to_string(n) + " array");
	Mat m(n);
	for (int r = 0; r < n; ++r) {
		auto const &row = j.at(size_t(r));
		if (!row.is_array() || int(row.size()) != n)
			throw load_error(where + ": row " + std::to_string(r) + " has wrong length");
		for (int c = 0; c < n; ++c)
			m.at(r, c) = parse_scalar(row.at(size_t(c)),
			                          where + "[" + std::to_string(r) + "][" +
			                              std::to_string(c) + "]");
	}
	return m;
}

Gen parse_gen(std::string const &s, Model const &m, std::string const &where)
{
	auto open = s.find('(');
	auto close = s.rfind(')');
	if (open == std::string::npos || close == std::string::npos || close < open)
		throw load_error(where + ": generator '" + s + "' is not name(site)");
	std::string name = s.substr(0, open);
	int site = 0;
	try {
		site = std::stoi(s.substr(open + 1, close - open - 1));
	} catch (...) {
		throw load_error(where + ": bad site in generator '" + s + "'");
	}
	if (site < 0 || site >= m.n_sites())
		throw load_error(where + ": site out of range in '" + s + "'");
	return pack_gen(site, m.species().id_of(name));
}

Functional parse_functional(json const &j, Model const &m, int trunc, std::string const &where)
{
	Functional F(m.tabp(), trunc);
	if (!j.is_array())
		throw load_error(where + ": expected an array of terms");
	int tix = 0;
	for (auto const &t : j) {
		std::string tw = where + ".term[" + std::to_string(tix++) + "]";
		Scalar c = t.contains("coeff") ? parse_scalar(t.at("coeff"), tw) : Scalar(1);
		int hb = t.value("hbar", 0);
		if (hb < 0)
			throw load_error(tw + ": negative hbar power");
		Monomial mo;
		int sign = 1;
		if (t.contains("gens"))
			for (auto const &gs : t.at("gens")) {
				Gen g = parse_gen(gs.get<std::string>(), m, tw);
				Monomial one;
				one.f.emplace_back(g, 1);
				auto pr = mono_mul(mo, one, m.species());
				if (!pr) {
					sign = 0;
					break;
				}
				mo = pr->first;
				sign *= pr->second;
			}
		if (sign == 0)
			continue;
		F.add_term(mo, HbarSeries::term(c * Scalar(sign), hb, trunc));
	}
	return F;
}

Density parse_density(json const &j, Model const &m, std::string const &where)
{
	Density d;
	if (!j.is_array())
		throw load_error(where + ": expected an array of density terms");
	for (auto const &t : j) {
		Scalar c = t.contains("coeff") ? parse_scalar(t.at("coeff"), where) : Scalar(1);
		std::vector<std::pair<int, uint32_t>> pows;
		for (auto const &gs : t.at("gens")) {
			int sid = m.species().id_of(gs.get<std::string>());
			if (!pows.empty() && pows.back().first == sid)
				pows.back().second += 1;
			else
				pows.emplace_back(sid, 1);
		}
		d.terms.emplace_back(std::move(pows), c);
	}
	return d;
}

} // namespace

Functional const &Bundle::func(std::string const &name) const
{
	auto it = funcs.find(name);
	if (it == funcs.end())
		throw load_error("model file does not define functional '" + name + "'");
	return it->second;
}

Bundle load_model_text(std::string const &text, std::string const &origin)
{
	json j;
	try {
		j = json::parse(text);
	} catch (std::exception const &e) {
		throw load_error(origin + ": " + e.what());
	}
	ModelSpec spec;
	try {
		spec.n_sites = j.at("sites").get<int>();
		if (j.contains("order"))
			spec.time_order = j.at("order").get<std::vector<int>>();
		spec.window = j.at("window").get<std::vector<int>>();
		for (auto const &s : j.at("species")) {
			SpeciesDecl d;
			d.name = s.at("name").get<std::string>();
			std::string par = s.value("parity", "even");
			if (par != "even" && par != "odd")
				throw load_error("species " + d.name + ": parity must be even|odd");
			d.odd = (par == "odd");
			d.ghost = s.value("ghost", 0);
			d.kinetic = s.value("kinetic", false);
			spec.species.push_back(d);
		}
		spec.K = parse_matrix(j.at("K"), spec.n_sites, origin + ":K");
		if (j.contains("Delta_R"))
			spec.delta_R = parse_matrix(j.at("Delta_R"), spec.n_sites, origin + ":Delta_R");
		if (j.contains("H"))
			spec.H = parse_matrix(j.at("H"), spec.n_sites, origin + ":H");
	} catch (load_error const &) {
		throw;
	} catch (std::exception const &e) {
		throw load_error(origin + ": " + e.what());
	}

	Bundle b;
	try {
		b.model = std::make_shared<Model>(build_model(spec));
	} catch (model_error const &e) {
		throw load_error(origin + ": " + e.what());
	}
	if (j.contains("functionals"))
		for (auto const &[name, terms] : j.at("functionals").items())
			b.funcs.emplace(name, parse_functional(terms, *b.model, b.store_trunc,
			                                       origin + ":functionals." + name));
	if (j.contains("Z")) {
		int kix = 0;
		for (auto const &k : j.at("Z")) {
			std::string kw = origin + ":Z[" + std::to_string(kix++) + "]";
			ZKernel ker;
			ker.n = k.at("n").get<int>();
			if (k.contains("derivs"))
				ker.derivs = k.at("derivs").get<std::vector<uint32_t>>();
			else
				ker.derivs.assign(size_t(ker.n), 1);
			int hb = k.value("hbar", 1);
			Scalar c = k.contains("coeff") ? parse_scalar(k.at("coeff"), kw) : Scalar(1);
			ker.coeff = HbarSeries::term(c, hb, b.store_trunc);
			if (ker.n < 2 || int(ker.derivs.size()) != ker.n || hb < 1)
				throw load_error(kw + ": kernel must have n>=2, matching derivs, hbar>=1");
			b.Z.kernels.push_back(std::move(ker));
		}
	}
	if (j.contains("densities"))
		for (auto const &[name, terms] : j.at("densities").items())
			b.densities.emplace(name,
			                    parse_density(terms, *b.model, origin + ":densities." + name));
	return b;
}

Bundle load_model(std::string const &path)
{
	std::ifstream in(path);
	if (!in)
		throw load_error("cannot open model file: " + path);
	std::stringstream ss;
	ss << in.rdbuf();
	return load_model_text(ss.str(), path);
}

} // namespace bvlat
