#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "ministep/ast.hpp"

namespace ministep {

// ------------------------------
// frames
// ------------------------------

// Comments show the expression each frame rebuilds around the hole [.].
struct CAppR { ExprPtr fn; };                     // e [.]
struct CAppL { ExprPtr arg; };                    // [.] v
struct CRaise {};                                 // raise [.]
struct CBinR { BinaryOp op; ExprPtr left; };      // e op [.]
struct CBinL { BinaryOp op; ExprPtr right; };     // [.] op v
struct CShortCircuit { BinaryOp op; ExprPtr right; };  // [.] && e, [.] || e
struct CUn { UnaryOp op; };                       // -[.], not [.]
struct CIf { ExprPtr then_branch, else_branch; };  // if [.] then e1 else e2
struct CLet { PatternPtr binding; ExprPtr body; };  // let p = [.] in e
struct CConsR { ExprPtr head; };                  // e :: [.]
struct CConsL { ExprPtr tail; };                  // [.] :: v
// (e1, .., ek, [.], v1, .., vm): items left of the hole are still unevaluated.
struct CTuple { std::vector<ExprPtr> left; std::vector<ExprPtr> right; };
struct CMatch { Clauses clauses; };               // match [.] with ...
struct CSeq { ExprPtr second; };                  // [.]; e

using Frame = std::variant<CAppR, CAppL, CRaise, CBinR, CBinL, CShortCircuit, CUn, CIf, CLet,
                           CConsR, CConsL, CTuple, CMatch, CSeq>;

/// Applies one frame: the expression `f` builds with `e` in its hole.
ExprPtr wrap(const Frame& f, ExprPtr e);

// ------------------------------
// contexts
// ------------------------------

struct FrameNode;
/// Persistent list, innermost frame first. Null is the empty list.
using FrameList = std::shared_ptr<const FrameNode>;

struct FrameNode {
    Frame frame;
    FrameList next;
};

struct TryLink;
/// Chain of enclosing handlers. Null is CHole.
using MetaCtxt = std::shared_ptr<const TryLink>;

/// Delimited frames up to the nearest handler, plus the handler chain beyond it.
struct Ctxt {
    FrameList frames;
    MetaCtxt meta;
};

/// CTry: the handler clauses and the context the whole `try` sits in.
struct TryLink {
    Clauses clauses;
    Ctxt outer;
};

Ctxt add(const Ctxt& c, Frame f);

/// ([], CTry(clauses, c))
Ctxt add_try(const Ctxt& c, Clauses clauses);

/// Rebuilds the tryee: wraps `e` in `frames`, innermost first.
ExprPtr plug_in_try(ExprPtr e, const FrameList& frames);

/// Rebuilds the whole program around `e`.
ExprPtr plug(ExprPtr e, const Ctxt& c);

std::vector<Frame> to_vector(const FrameList& frames);
FrameList from_vector(const std::vector<Frame>& frames);

/// Frame in hole notation, e.g. "3 + [.]".
std::string to_string(const Frame& f);

/// Context in the notation ([3 + [.]; [.] - 5], CTry (x -> x + 6, ([2 * [.]], CHole))).
std::string to_string(const Ctxt& c);

}  // namespace ministep
