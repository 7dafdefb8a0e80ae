#include "ministep/context.hpp"

#include "ministep/detail/overloaded.hpp"
#include "ministep/printer.hpp"

namespace ministep {

using detail::overloaded;

ExprPtr wrap(const Frame& f, ExprPtr e) {
    return std::visit(
        overloaded{
            [&](const CAppR& x) { return app(x.fn, e); },
            [&](const CAppL& x) { return app(e, x.arg); },
            [&](const CRaise&) { return raise_expr(e); },
            [&](const CBinR& x) { return binop(x.op, x.left, e); },
            [&](const CBinL& x) { return binop(x.op, e, x.right); },
            [&](const CShortCircuit& x) { return binop(x.op, e, x.right); },
            [&](const CUn& x) { return make(UnOp{x.op, e}); },
            [&](const CIf& x) { return make(If{e, x.then_branch, x.else_branch}); },
            [&](const CLet& x) { return make(Let{x.binding, e, x.body}); },
            [&](const CConsR& x) { return cons(x.head, e); },
            [&](const CConsL& x) { return cons(e, x.tail); },
            [&](const CTuple& x) {
                std::vector<ExprPtr> items = x.left;
                items.push_back(e);
                items.insert(items.end(), x.right.begin(), x.right.end());
                return make(Tuple{std::move(items)});
            },
            [&](const CMatch& x) { return make(Match{e, x.clauses}); },
            [&](const CSeq& x) { return make(Seq{e, x.second}); },
        },
        f);
}

Ctxt add(const Ctxt& c, Frame f) {
    return Ctxt{std::make_shared<const FrameNode>(FrameNode{std::move(f), c.frames}), c.meta};
}

Ctxt add_try(const Ctxt& c, Clauses clauses) {
    return Ctxt{nullptr, std::make_shared<const TryLink>(TryLink{std::move(clauses), c})};
}

ExprPtr plug_in_try(ExprPtr e, const FrameList& frames) {
    for (const FrameNode* node = frames.get(); node != nullptr; node = node->next.get()) {
        e = wrap(node->frame, std::move(e));
    }
    return e;
}

ExprPtr plug(ExprPtr e, const Ctxt& c) {
    const Ctxt* current = &c;
    for (;;) {
        e = plug_in_try(std::move(e), current->frames);
        if (!current->meta) return e;
        e = make(Try{std::move(e), current->meta->clauses});
        current = &current->meta->outer;
    }
}

std::vector<Frame> to_vector(const FrameList& frames) {
    std::vector<Frame> out;
    for (const FrameNode* node = frames.get(); node != nullptr; node = node->next.get()) {
        out.push_back(node->frame);
    }
    return out;
}

FrameList from_vector(const std::vector<Frame>& frames) {
    FrameList list;
    for (auto it = frames.rbegin(); it != frames.rend(); ++it) {
        list = std::make_shared<const FrameNode>(FrameNode{*it, list});
    }
    return list;
}

std::string to_string(const Frame& f) {
    return to_string(*wrap(f, var("[.]")));
}

std::string to_string(const Ctxt& c) {
    std::string out = "([";
    bool first = true;
    for (const FrameNode* node = c.frames.get(); node != nullptr; node = node->next.get()) {
        if (!first) out += "; ";
        first = false;
        out += to_string(node->frame);
    }
    out += "], ";
    if (!c.meta) {
        out += "CHole";
    } else {
        out += "CTry (";
        for (std::size_t i = 0; i < c.meta->clauses.size(); ++i) {
            if (i > 0) out += " | ";
            out += to_string(*c.meta->clauses[i].pattern) + " -> " +
                   to_string(*c.meta->clauses[i].body);
        }
        out += ", " + to_string(c.meta->outer) + ")";
    }
    out += ")";
    return out;
}

}  // namespace ministep
