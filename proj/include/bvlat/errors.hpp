#pragma once

#include <stdexcept>
#include <string>

namespace bvlat {

struct truncation_error : std::invalid_argument {
	using std::invalid_argument::invalid_argument;
};

struct grading_error : std::invalid_argument {
	using std::invalid_argument::invalid_argument;
};

struct support_error : std::invalid_argument {
	using std::invalid_argument::invalid_argument;
};

struct model_error : std::invalid_argument {
	using std::invalid_argument::invalid_argument;
};

struct load_error : std::runtime_error {
	using std::runtime_error::runtime_error;
};

struct domain_error : std::invalid_argument {
	using std::invalid_argument::invalid_argument;
};

} // namespace bvlat
