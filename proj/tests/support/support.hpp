#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "ministep/ast.hpp"
#include "ministep/engine.hpp"

namespace ministep::testing {

/// A corpus program with its hand-derived expected outcome.
struct CorpusEntry {
    std::string name;
    std::string source;
    std::string expected_kind;  // value | exception | stuck
    std::string expected_text;  // value, payload, or stuck reason
    std::string expected_output;
};

inline void PrintTo(const CorpusEntry& e, std::ostream* os) { *os << e.name << ".ml"; }

std::filesystem::path corpus_dir();
std::vector<CorpusEntry> load_corpus();

/// Parses an expression that may mention the given globals and free variables.
ExprPtr tree(const std::string& text, const std::set<std::string>& globals = {});


/// Random well-formed closed programs (int-valued main expression).
class TermGenerator {
public:
    explicit TermGenerator(std::uint32_t seed, int max_depth = 6);
    std::string next_program();

private:
    struct Impl;
    std::shared_ptr<Impl> impl_;
};

/// Every expression node reachable from `e`, including `e`.
std::vector<ExprPtr> subterms(const ExprPtr& e);

}  // namespace ministep::testing
