#pragma once

#include <stdexcept>
#include <string>

namespace lpakit {

enum class errc {
    parse_error,
    attachment_rule_violation,
    unknown_vertex,
    unknown_fixture,
    needs_deeper_unroll,
    precondition,
    tail_unsupported,
    lattice_violation,
    infinite_primes,
    unrepresentable,
    target_hypothesis_violated,
    no_infinite_paths,
    infinite_cluster_family,
    lifting_violation,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::parse_error: return "ParseError";
        case errc::attachment_rule_violation: return "AttachmentRuleViolation";
        case errc::unknown_vertex: return "UnknownVertex";
        case errc::unknown_fixture: return "UnknownFixture";
        case errc::needs_deeper_unroll: return "NeedsDeeperUnroll";
        case errc::precondition: return "PreconditionError";
        case errc::tail_unsupported: return "TailUnsupported";
        case errc::lattice_violation: return "LatticeViolation";
        case errc::infinite_primes: return "InfinitePrimes";
        case errc::unrepresentable: return "Unrepresentable";
        case errc::target_hypothesis_violated: return "TargetHypothesisViolated";
        case errc::no_infinite_paths: return "NoInfinitePaths";
        case errc::infinite_cluster_family: return "InfiniteClusterFamily";
        case errc::lifting_violation: return "LiftingViolation";
    }
    return "Error";
}

// Every domain failure carries a kind and a short witness string.
class error : public std::runtime_error {
public:
    error(errc code, std::string witness, long line = 0)
        : std::runtime_error(std::string(errc_name(code)) + ": " + witness),
          code_(code), witness_(std::move(witness)), line_(line) {}

    errc code() const noexcept { return code_; }
    const std::string& witness() const noexcept { return witness_; }
    // Only meaningful for parse errors.
    long line() const noexcept { return line_; }

private:
    errc code_;
    std::string witness_;
    long line_;
};

}  // namespace lpakit
