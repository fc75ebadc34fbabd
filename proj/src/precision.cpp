#include "nestlab/precision.hpp"

#include "nestlab/errors.hpp"

#include <charconv>

namespace nestlab {

Precision Precision::ext(unsigned digits) {
    if (digits < 30) throw ConfigError("extended precision needs at least 30 digits");
    if (digits > 2000) throw ConfigError("extended precision capped at 2000 digits");
    return {Backend::ext, digits};
}

Precision Precision::parse(std::string_view text) {
    if (text == "f64") return f64();
    if (text.size() > 3 && text.substr(0, 3) == "ext") {
        unsigned digits = 0;
        auto body = text.substr(3);
        auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), digits);
        if (ec == std::errc() && ptr == body.data() + body.size()) return ext(digits);
    }
    throw ConfigError("precision must be f64 or extN, got '" + std::string(text) + "'");
}

std::string Precision::name() const { return backend == Backend::f64 ? "f64" : "ext" + std::to_string(digits); }

PrecisionScope::PrecisionScope(unsigned digits) : saved_(ext_real::default_precision()) {
    ext_real::default_precision(digits);
}

PrecisionScope::~PrecisionScope() { ext_real::default_precision(saved_); }

}  // namespace nestlab
