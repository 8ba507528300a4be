// cookie_env.hpp - cookie environments on the integers.
//
// A law is a finite mixture of deterministic cookie stacks.  Each site of the
// lattice independently draws one stack; visit i to that site steps right with
// the stack's i-th probability, and with probability 1/2 once the m stored
// cookies are consumed.  The drift parameter delta is always computed from the
// stacks, never supplied by hand.
#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "rng.hpp"

namespace erwlab {

struct CookieStack {
    std::vector<double> probs;
    double weight = 1.0;
};

class CookieLaw {
public:
    CookieLaw(int m, std::vector<CookieStack> stacks) : m_(m), stacks_(std::move(stacks)) {
        validate();
        double wsum = 0.0;
        for (const auto& st : stacks_) wsum += st.weight;
        cum_.reserve(stacks_.size());
        double acc = 0.0;
        delta_ = 0.0;
        for (auto& st : stacks_) {
            st.weight /= wsum;
            acc += st.weight;
            cum_.push_back(acc);
            double drift = 0.0;
            for (double p : st.probs) drift += 2.0 * p - 1.0;
            delta_ += st.weight * drift;
        }
        cum_.back() = 1.0;
    }

    static CookieLaw fair() { return CookieLaw(1, {CookieStack{{0.5}, 1.0}}); }

    // m identical cookies of strength 1/2 + delta/(2m), with m = max(1, ceil(2|delta|))
    // so the strength stays inside (0, 1).
    static CookieLaw equal_strength(double delta) {
        const int m = std::max(1, static_cast<int>(std::ceil(2.0 * std::fabs(delta))));
        const double p = 0.5 + delta / (2.0 * m);
        if (!(p > 0.0 && p < 1.0))
            throw std::invalid_argument("equal_strength: delta not realizable");
        return CookieLaw(m, {CookieStack{std::vector<double>(m, p), 1.0}});
    }

    double delta() const { return delta_; }
    int m() const { return m_; }
    std::size_t n_stacks() const { return stacks_.size(); }
    const std::vector<double>& probs(std::size_t k) const { return stacks_[k].probs; }
    double weight(std::size_t k) const { return stacks_[k].weight; }

    double prob(std::size_t stack, std::uint32_t visit) const {  // visit is 0-based
        return visit < static_cast<std::uint32_t>(m_) ? stacks_[stack].probs[visit] : 0.5;
    }

    std::size_t sample_index(double u) const {
        std::size_t k = 0;
        while (k + 1 < cum_.size() && u >= cum_[k]) ++k;
        return k;
    }

    CookieLaw mirror() const {
        std::vector<CookieStack> flipped = stacks_;
        for (auto& st : flipped)
            for (double& p : st.probs) p = 1.0 - p;
        return CookieLaw(m_, std::move(flipped));
    }

    static CookieLaw from_json_text(const std::string& text) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::exception& e) {
            throw std::invalid_argument(std::string("cookie config: ") + e.what());
        }
        if (!j.is_object() || !j.contains("m") || !j.contains("stacks"))
            throw std::invalid_argument("cookie config: need fields 'm' and 'stacks'");
        const int m = j.at("m").get<int>();
        std::vector<CookieStack> stacks;
        for (const auto& js : j.at("stacks")) {
            CookieStack st;
            st.probs = js.at("probs").get<std::vector<double>>();
            st.weight = js.value("weight", 1.0);
            stacks.push_back(std::move(st));
        }
        return CookieLaw(m, std::move(stacks));
    }

    static CookieLaw from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("cookie config: cannot open " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return from_json_text(ss.str());
    }

    std::string to_json_text() const {
        nlohmann::json j;
        j["m"] = m_;
        j["delta"] = delta_;
        j["stacks"] = nlohmann::json::array();
        for (const auto& st : stacks_)
            j["stacks"].push_back({{"probs", st.probs}, {"weight", st.weight}});
        return j.dump(2);
    }

private:
    void validate() const {
        if (m_ < 1) throw std::invalid_argument("cookie law: m must be positive");
        if (stacks_.empty()) throw std::invalid_argument("cookie law: no stacks");
        bool some_all_below_one = false;
        bool some_all_above_zero = false;
        for (const auto& st : stacks_) {
            if (static_cast<int>(st.probs.size()) != m_)
                throw std::invalid_argument("cookie law: each stack needs exactly m probabilities");
            if (!(st.weight > 0.0))
                throw std::invalid_argument("cookie law: stack weights must be positive");
            bool below_one = true, above_zero = true;
            for (double p : st.probs) {
                if (!(p >= 0.0 && p <= 1.0))
                    throw std::invalid_argument("cookie law: probabilities must lie in [0, 1]");
                below_one = below_one && p < 1.0;
                above_zero = above_zero && p > 0.0;
            }
            some_all_below_one = some_all_below_one || below_one;
            some_all_above_zero = some_all_above_zero || above_zero;
        }
        // ellipticity: leftward steps possible somewhere, rightward steps possible somewhere
        if (!some_all_below_one || !some_all_above_zero)
            throw std::invalid_argument("cookie law: ellipticity violated");
    }

    int m_;
    std::vector<CookieStack> stacks_;
    std::vector<double> cum_;
    double delta_ = 0.0;
};

inline double delta_of(const CookieLaw& law) { return law.delta(); }
inline CookieLaw mirror(const CookieLaw& law) { return law.mirror(); }

// Per-site realized stack: which mixture component the site drew, plus how many
// cookies have been consumed.
class SiteStack {
public:
    SiteStack(const CookieLaw& law, std::size_t index) : law_(&law), index_(index) {}

    double next_probability() { return law_->prob(index_, cursor_++); }
    double peek(std::uint32_t visit) const { return law_->prob(index_, visit); }
    std::uint32_t cursor() const { return cursor_; }
    std::size_t index() const { return index_; }

private:
    const CookieLaw* law_;
    std::size_t index_;
    std::uint32_t cursor_ = 0;
};

inline SiteStack sample_stack(const CookieLaw& law, Stream& s) {
    return SiteStack(law, law.sample_index(s.uniform()));
}

}  // namespace erwlab
