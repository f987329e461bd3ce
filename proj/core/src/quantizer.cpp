#include "bctx/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace bctx {

Quantizer::Quantizer(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {
    if (thresholds_.empty()) {
        throw std::invalid_argument("quantizer needs at least one threshold (alphabet size >= 2)");
    }
    if (thresholds_.size() > 255) {
        throw std::invalid_argument("quantizer alphabet is limited to 256 symbols");
    }
    for (std::size_t i = 0; i < thresholds_.size(); ++i) {
        if (!std::isfinite(thresholds_[i])) {
            throw std::invalid_argument("quantizer thresholds must be finite");
        }
        if (i > 0 && !(thresholds_[i - 1] < thresholds_[i])) {
            throw std::invalid_argument("quantizer thresholds must be strictly increasing");
        }
    }
}

Symbol Quantizer::operator()(double x) const noexcept {
    auto it = std::upper_bound(thresholds_.begin(), thresholds_.end(), x);
    return static_cast<Symbol>(it - thresholds_.begin());
}

Symbol Quantizer::quantize_open(double x) const noexcept {
    auto it = std::lower_bound(thresholds_.begin(), thresholds_.end(), x);
    return static_cast<Symbol>(it - thresholds_.begin());
}

Context context_at(std::span<const double> series, std::size_t position, const Quantizer& q,
                   int depth) {
    if (depth < 0) {
        throw std::invalid_argument("context depth must be nonnegative");
    }
    const auto d = static_cast<std::size_t>(depth);
    if (position < d || position > series.size()) {
        throw std::out_of_range("context_at: position " + std::to_string(position) +
                                " has fewer than " + std::to_string(d) + " preceding samples");
    }
    Context ctx(d);
    for (std::size_t k = 0; k < d; ++k) {
        ctx[k] = q(series[position - 1 - k]);
    }
    return ctx;
}

std::string context_to_string(std::span<const Symbol> context, int alphabet_size) {
    std::string out;
    if (alphabet_size <= 10) {
        out.reserve(context.size());
        for (Symbol s : context) out.push_back(static_cast<char>('0' + s));
        return out;
    }
    for (std::size_t i = 0; i < context.size(); ++i) {
        if (i > 0) out.push_back('.');
        out += std::to_string(context[i]);
    }
    return out;
}

Context context_from_string(const std::string& text, int alphabet_size) {
    Context ctx;
    auto check = [&](int v) {
        if (v < 0 || v >= alphabet_size) {
            throw std::invalid_argument("context '" + text + "' has a symbol outside the alphabet");
        }
        ctx.push_back(static_cast<Symbol>(v));
    };
    if (alphabet_size <= 10) {
        for (char c : text) {
            if (c < '0' || c > '9') throw std::invalid_argument("bad context string '" + text + "'");
            check(c - '0');
        }
        return ctx;
    }
    std::size_t start = 0;
    while (start < text.size()) {
        auto dot = text.find('.', start);
        auto piece = text.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        check(std::stoi(piece));
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    return ctx;
}

}  // namespace bctx
