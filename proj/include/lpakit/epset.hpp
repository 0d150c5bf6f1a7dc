#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace lpakit {

// Eventually periodic subset of the natural numbers. For n >= threshold,
// membership is mask[n mod period]; below the threshold it is explicit.
class EPSet {
public:
    using index = std::uint64_t;

    EPSet() : threshold_(0), period_(1), mask_(1, false) {}

    static EPSet all() { return EPSet(0, 1, {true}, {}); }
    static EPSet none() { return EPSet(); }
    static EPSet singleton(index n) { return range(n, n + 1); }
    // [lo, hi)
    static EPSet range(index lo, index hi) {
        std::vector<index> ex;
        for (index i = lo; i < hi; ++i) ex.push_back(i);
        return EPSet(hi, 1, {false}, ex);
    }
    static EPSet at_least(index n) { return EPSet(n, 1, {true}, {}); }

    // Any (threshold, period, residues, exceptions) description, normalized.
    EPSet(index threshold, index period, std::vector<bool> mask, std::vector<index> exceptions)
        : threshold_(threshold), period_(period), mask_(std::move(mask)) {
        if (period_ == 0) period_ = 1;
        mask_.resize(period_, false);
        for (index e : exceptions)
            if (e < threshold_) below_.push_back(e);
        std::sort(below_.begin(), below_.end());
        below_.erase(std::unique(below_.begin(), below_.end()), below_.end());
        normalize();
    }

    // Builds from membership bits on [0, threshold + period), reading the
    // periodic part from [threshold, threshold + period).
    static EPSet from_bits(const std::vector<bool>& bits, index threshold, index period) {
        std::vector<bool> mask(period, false);
        std::vector<index> ex;
        for (index i = 0; i < threshold; ++i)
            if (i < bits.size() && bits[i]) ex.push_back(i);
        for (index i = threshold; i < threshold + period; ++i)
            if (i < bits.size() && bits[i]) mask[i % period] = true;
        return EPSet(threshold, period, mask, ex);
    }

    // Guesses an eventually periodic continuation of a finite prefix.
    // The periodic part must be observed at least twice.
    static EPSet from_prefix(const std::vector<bool>& bits) {
        index w = bits.size();
        if (w == 0) return EPSet();
        index best_n = w, best_p = 1;
        bool found = false;
        for (index p = 1; 2 * p <= w; ++p) {
            index n = w - p;
            while (n > 0 && bits[n - 1] == bits[n - 1 + p]) --n;
            if (w - n < 2 * p) continue;
            if (!found || n + p < best_n + best_p) {
                best_n = n;
                best_p = p;
                found = true;
            }
        }
        if (!found) {
            best_n = w > 0 ? w - 1 : 0;
            best_p = 1;
        }
        return from_bits(bits, best_n, best_p);
    }

    bool contains(index n) const {
        if (n < threshold_) return std::binary_search(below_.begin(), below_.end(), n);
        return mask_[n % period_];
    }

    index threshold() const { return threshold_; }
    index period() const { return period_; }
    const std::vector<bool>& mask() const { return mask_; }
    const std::vector<index>& exceptions() const { return below_; }

    bool empty() const { return below_.empty() && !any_periodic(); }
    bool finite() const { return !any_periodic(); }
    bool is_all() const { return threshold_ == 0 && period_ == 1 && mask_[0]; }
    std::optional<index> size() const {
        if (!finite()) return std::nullopt;
        return below_.size();
    }
    std::optional<index> min() const {
        if (!below_.empty()) return below_.front();
        for (index i = threshold_; i < threshold_ + period_; ++i)
            if (contains(i)) return i;
        return std::nullopt;
    }

    // Members strictly below bound, ascending.
    std::vector<index> members_below(index bound) const {
        std::vector<index> out;
        for (index i = 0; i < bound; ++i)
            if (contains(i)) out.push_back(i);
        return out;
    }

    EPSet operator|(const EPSet& o) const { return combine(o, [](bool a, bool b) { return a || b; }); }
    EPSet operator&(const EPSet& o) const { return combine(o, [](bool a, bool b) { return a && b; }); }
    EPSet operator-(const EPSet& o) const { return combine(o, [](bool a, bool b) { return a && !b; }); }
    EPSet complement() const { return all() - *this; }
    bool subset_of(const EPSet& o) const { return (*this - o).empty(); }

    bool operator==(const EPSet& o) const = default;

    // {offset + stride * m + residue : m in this}
    EPSet affine_image(index offset, index stride, index residue) const {
        index base = offset + residue;
        index t = base + stride * threshold_;
        index p = stride * period_;
        std::vector<bool> bits(t + p, false);
        for (index j = base; j < t + p; j += stride) bits[j] = contains((j - base) / stride);
        return from_bits(bits, t, p);
    }

    // {m : offset + stride * m + residue in this}
    EPSet affine_preimage(index offset, index stride, index residue) const {
        index base = offset + residue;
        index t = threshold_ > base ? (threshold_ - base + stride - 1) / stride : 0;
        index p = period_ / std::gcd(period_, stride);
        std::vector<bool> bits(t + p, false);
        for (index m = 0; m < t + p; ++m) bits[m] = contains(base + stride * m);
        return from_bits(bits, t, p);
    }

    std::string to_string() const {
        std::ostringstream os;
        if (empty()) return "{}";
        if (is_all()) return "N";
        os << "{";
        bool first = true;
        for (index e : below_) {
            os << (first ? "" : ",") << e;
            first = false;
        }
        os << "}";
        if (any_periodic()) {
            os << " + {n>=" << threshold_;
            if (period_ > 1) {
                os << " : n mod " << period_ << " in ";
                bool f = true;
                os << "{";
                for (index r = 0; r < period_; ++r)
                    if (mask_[r]) {
                        os << (f ? "" : ",") << r;
                        f = false;
                    }
                os << "}";
            }
            os << "}";
        }
        std::string s = os.str();
        if (s.rfind("{} + ", 0) == 0) s = s.substr(5);
        return s;
    }

private:
    index threshold_;
    index period_;
    std::vector<bool> mask_;
    std::vector<index> below_;

    bool any_periodic() const { return std::find(mask_.begin(), mask_.end(), true) != mask_.end(); }

    template <class Op>
    EPSet combine(const EPSet& o, Op op) const {
        index t = std::max(threshold_, o.threshold_);
        index p = std::lcm(period_, o.period_);
        std::vector<bool> bits(t + p);
        for (index i = 0; i < t + p; ++i) bits[i] = op(contains(i), o.contains(i));
        return from_bits(bits, t, p);
    }

    void normalize() {
        // Minimal period of the residue mask.
        for (index d = 1; d <= period_; ++d) {
            if (period_ % d) continue;
            bool ok = true;
            for (index i = 0; i < period_ && ok; ++i) ok = mask_[i] == mask_[i % d];
            if (ok) {
                mask_.resize(d);
                period_ = d;
                break;
            }
        }
        // Minimal threshold for that period.
        while (threshold_ > 0) {
            index n = threshold_ - 1;
            bool in = std::binary_search(below_.begin(), below_.end(), n);
            if (in != static_cast<bool>(mask_[n % period_])) break;
            if (in) below_.pop_back();
            --threshold_;
        }
        if (!any_periodic() && below_.empty()) threshold_ = 0;
        else if (!any_periodic()) threshold_ = below_.back() + 1;
    }
};

}  // namespace lpakit
