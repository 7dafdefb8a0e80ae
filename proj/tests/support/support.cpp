#include "support.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "ministep/detail/overloaded.hpp"
#include "ministep/parser.hpp"

#ifndef MINISTEP_CORPUS_DIR
#error "MINISTEP_CORPUS_DIR must be defined"
#endif

namespace ministep::testing {

std::filesystem::path corpus_dir() { return MINISTEP_CORPUS_DIR; }

namespace {

std::string unescape(const std::string& s) {
    std::string out;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == '\\' && i + 1 < s.size()) {
            char c = s[++i];
            out += c == 'n' ? '\n' : c;
        } else {
            out += s[i];
        }
    }
    return out;
}

// Text between "(* <key>: " and " *)" on a header line, if present.
bool header(const std::string& line, const std::string& key, std::string& value) {
    std::string open = "(* " + key + ": ";
    if (line.rfind(open, 0) != 0 || line.size() < open.size() + 3) return false;
    if (line.compare(line.size() - 3, 3, " *)") != 0) return false;
    value = line.substr(open.size(), line.size() - open.size() - 3);
    return true;
}

}  // namespace

std::vector<CorpusEntry> load_corpus() {
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(corpus_dir())) {
        if (entry.path().extension() == ".ml") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<CorpusEntry> out;
    for (const auto& path : files) {
        std::ifstream in(path, std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        CorpusEntry e;
        e.name = path.stem().string();
        e.source = buf.str();
        std::istringstream lines(e.source);
        std::string line;
        std::string value;
        while (std::getline(lines, line)) {
            if (header(line, "expect", value)) {
                auto space = value.find(' ');
                e.expected_kind = value.substr(0, space);
                e.expected_text = space == std::string::npos ? "" : value.substr(space + 1);
            } else if (header(line, "output", value)) {
                e.expected_output = unescape(value);
            }
        }
        if (e.expected_kind.empty()) throw std::runtime_error("no expectation in " + path.string());
        out.push_back(std::move(e));
    }
    return out;
}

ExprPtr tree(const std::string& text, const std::set<std::string>& globals) {
    ParseOptions opts;
    opts.globals = globals;
    opts.allow_free_vars = true;
    return parse_expr(text, opts);
}

std::vector<ExprPtr> subterms(const ExprPtr& root) {
    std::vector<ExprPtr> out;
    std::vector<ExprPtr> todo{root};
    while (!todo.empty()) {
        ExprPtr e = todo.back();
        todo.pop_back();
        out.push_back(e);
        auto push = [&](const ExprPtr& child) { if (child) todo.push_back(child); };
        auto clauses = [&](const Clauses& cs) { for (const Clause& c : cs) push(c.body); };
        std::visit(detail::overloaded{
                       [&](const Fun& x) { push(x.body); },
                       [&](const App& x) { push(x.fn); push(x.arg); },
                       [&](const BinOp& x) { push(x.left); push(x.right); },
                       [&](const UnOp& x) { push(x.operand); },
                       [&](const If& x) { push(x.cond); push(x.then_branch); push(x.else_branch); },
                       [&](const Let& x) { push(x.bound); push(x.body); },
                       [&](const LetRec& x) { push(x.fbody); push(x.body); },
                       [&](const Cons& x) { push(x.head); push(x.tail); },
                       [&](const Tuple& x) { for (const auto& i : x.items) push(i); },
                       [&](const Match& x) { push(x.scrutinee); clauses(x.clauses); },
                       [&](const Try& x) { push(x.tryee); clauses(x.clauses); },
                       [&](const Raise& x) { push(x.payload); },
                       [&](const Seq& x) { push(x.first); push(x.second); },
                       [&](const RecClosure& x) { push(x.fbody); },
                       [](const auto&) {},
                   },
                   e->node);
    }
    return out;
}

// ------------------------------
// random programs
// ------------------------------

enum class Ty { Int, Bool, List };

struct TermGenerator::Impl {
    std::mt19937 rng;
    int max_depth;
    int fresh = 0;
    std::vector<std::pair<std::string, Ty>> scope;

    Impl(std::uint32_t seed, int depth) : rng(seed), max_depth(depth) {}

    int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng); }

    std::string name() { return "v" + std::to_string(fresh++); }

    std::string variable(Ty t) {
        std::vector<std::string> candidates;
        for (const auto& [n, ty] : scope) {
            if (ty == t) candidates.push_back(n);
        }
        if (candidates.empty()) return "";
        return candidates[pick(static_cast<int>(candidates.size()))];
    }

    std::string with(const std::string& n, Ty t, int depth, Ty body_type) {
        scope.emplace_back(n, t);
        std::string body = gen(body_type, depth);
        scope.pop_back();
        return body;
    }

    std::string leaf(Ty t) {
        std::string v = pick(2) == 0 ? variable(t) : "";
        if (!v.empty()) return v;
        switch (t) {
            case Ty::Int: return std::to_string(pick(10));
            case Ty::Bool: return pick(2) ? "true" : "false";
            case Ty::List: return pick(2) ? "[]" : "[" + std::to_string(pick(5)) + "]";
        }
        return "0";
    }

    std::string gen(Ty t, int depth) {
        if (depth >= max_depth || pick(5) == 0) return leaf(t);
        int d = depth + 1;
        std::string n;
        switch (t) {
            case Ty::Int:
                switch (pick(14)) {
                    case 0: return "(" + gen(Ty::Int, d) + " + " + gen(Ty::Int, d) + ")";
                    case 1: return "(" + gen(Ty::Int, d) + " - " + gen(Ty::Int, d) + ")";
                    case 2: return "(" + gen(Ty::Int, d) + " * " + gen(Ty::Int, d) + ")";
                    case 3: return "(" + gen(Ty::Int, d) + " / " + gen(Ty::Int, d) + ")";
                    case 4:
                        return "(if " + gen(Ty::Bool, d) + " then " + gen(Ty::Int, d) + " else " +
                               gen(Ty::Int, d) + ")";
                    case 5:
                        n = name();
                        return "(let " + n + " = " + gen(Ty::Int, d) + " in " +
                               with(n, Ty::Int, d, Ty::Int) + ")";
                    case 6:
                        n = name();
                        return "((fun " + n + " -> " + with(n, Ty::Int, d, Ty::Int) + ") " +
                               gen(Ty::Int, d) + ")";
                    case 7:
                        return "(try " + gen(Ty::Int, d) + " with Division_by_zero -> " +
                               gen(Ty::Int, d) + " | 3 -> " + gen(Ty::Int, d) + ")";
                    case 8:
                        n = name();
                        return "(try " + gen(Ty::Int, d) + " with " + n + " -> " +
                               with(n, Ty::Int, d, Ty::Int) + ")";
                    case 9: return "(raise " + gen(Ty::Int, d) + ")";
                    case 10: {
                        std::string h = name();
                        std::string tl = name();
                        scope.emplace_back(h, Ty::Int);
                        scope.emplace_back(tl, Ty::List);
                        std::string cons_body = gen(Ty::Int, d);
                        scope.pop_back();
                        scope.pop_back();
                        return "(match " + gen(Ty::List, d) + " with [] -> " + gen(Ty::Int, d) +
                               " | " + h + " :: " + tl + " -> " + cons_body + ")";
                    }
                    case 11: return "(print_int " + gen(Ty::Int, d) + "; " + gen(Ty::Int, d) + ")";
                    case 12: {
                        // recursion guarded by a decreasing counter
                        std::string f = name();
                        std::string k = name();
                        std::string base = with(k, Ty::Int, d, Ty::Int);
                        scope.emplace_back(k, Ty::Int);
                        std::string step = gen(Ty::Int, d);
                        scope.pop_back();
                        return "(let rec " + f + " " + k + " = if " + k + " <= 0 then " + base +
                               " else " + step + " + " + f + " (" + k + " - 1) in " + f + " " +
                               std::to_string(pick(4)) + ")";
                    }
                    default: return "(- " + gen(Ty::Int, d) + ")";
                }
            case Ty::Bool:
                switch (pick(6)) {
                    case 0: return "(" + gen(Ty::Int, d) + " < " + gen(Ty::Int, d) + ")";
                    case 1: return "(" + gen(Ty::Int, d) + " = " + gen(Ty::Int, d) + ")";
                    case 2: return "(not " + gen(Ty::Bool, d) + ")";
                    case 3: return "(" + gen(Ty::Bool, d) + " && " + gen(Ty::Bool, d) + ")";
                    case 4: return "(" + gen(Ty::Bool, d) + " || " + gen(Ty::Bool, d) + ")";
                    default: return "(" + gen(Ty::List, d) + " = " + gen(Ty::List, d) + ")";
                }
            case Ty::List:
                switch (pick(3)) {
                    case 0: return "(" + gen(Ty::Int, d) + " :: " + gen(Ty::List, d) + ")";
                    case 1: return "[" + gen(Ty::Int, d) + "; " + gen(Ty::Int, d) + "]";
                    default:
                        return "(if " + gen(Ty::Bool, d) + " then " + gen(Ty::List, d) +
                               " else " + gen(Ty::List, d) + ")";
                }
        }
        return leaf(t);
    }
};

TermGenerator::TermGenerator(std::uint32_t seed, int max_depth)
    : impl_(std::make_shared<Impl>(seed, max_depth)) {}

std::string TermGenerator::next_program() {
    impl_->fresh = 0;
    std::string prelude;
    // occasionally route the term through a top-level function
    if (impl_->pick(3) == 0) {
        impl_->scope.emplace_back("a", Ty::Int);
        std::string body = impl_->gen(Ty::Int, 2);
        impl_->scope.pop_back();
        prelude = "let g a = " + body + " ;;\n";
        return prelude + "g " + impl_->gen(Ty::Int, 2) + "\n";
    }
    return impl_->gen(Ty::Int, 0) + "\n";
}

}  // namespace ministep::testing
