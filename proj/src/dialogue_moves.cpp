#include "planacq/dialogue_moves.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_map>

namespace planacq {

namespace {

constexpr const char* kCategoryNames[kMoveCategoryCount] = {
    "Directive-Make",
    "Directive-Other",
    "Directive-PickUp",
    "Directive-PutDown",
    "Directive-PutOn",
    "Inquiry-Act",
    "Inquiry-Goal",
    "Inquiry-NextStep",
    "Inquiry-OwnAct",
    "Inquiry-Possession",
    "Inquiry-Recipe",
    "Inquiry-Requirement",
    "Statement-Goal",
    "Statement-Inability",
    "Statement-LackKnowledge",
    "Statement-NextStep",
    "Statement-Other",
    "Statement-OwnAct",
    "Statement-Possession",
    "Statement-Recipe",
    "Statement-Requirement",
    "Statement-StepDone",
    "BACKCHANNEL",
    "OPINION",
    "AGREEMENT",
    "AnsAff",
    "CLOSING",
    "AnsNeg",
    "ACKNOWLEDGMENT",
    "AnsOth",
    "OPENING",
    "OrClause",
    "APOLOGY",
    "GameSpec",
    "other",
};

const std::vector<SlotKind> kNone{};
const std::vector<SlotKind> kM{SlotKind::Material};
const std::vector<SlotKind> kMM{SlotKind::Material, SlotKind::Material};
const std::vector<SlotKind> kMMM{SlotKind::Material, SlotKind::Material, SlotKind::Material};
const std::vector<SlotKind> kT{SlotKind::Tool};

MoveSignature sig(std::vector<std::vector<SlotKind>> alts) {
    return MoveSignature{std::move(alts)};
}

const MoveSignature& table_entry(MoveCategory c) {
    static const std::array<MoveSignature, kMoveCategoryCount> table = {
        sig({kM}),            // Directive-Make: Block
        sig({kNone}),         // Directive-Other
        sig({kM}),            // Directive-PickUp: Block
        sig({kNone, kM}),     // Directive-PutDown: [Block]
        sig({kM}),            // Directive-PutOn: Block
        sig({kNone}),         // Inquiry-Act
        sig({kNone, kM}),     // Inquiry-Goal: [Block]
        sig({kNone}),         // Inquiry-NextStep
        sig({kNone, kM, kMM}),// Inquiry-OwnAct: [Block or Block-Pair]
        sig({kNone}),         // Inquiry-Possession
        sig({kM}),            // Inquiry-Recipe: Block
        sig({kM}),            // Inquiry-Requirement: Block
        sig({kM}),            // Statement-Goal: Block
        sig({kNone}),         // Statement-Inability
        sig({kNone, kM}),     // Statement-LackKnowledge: [Block]
        sig({kM, kMM}),       // Statement-NextStep: Block or Block-Pair
        sig({kNone}),         // Statement-Other
        sig({kM}),            // Statement-OwnAct: Block
        sig({kT}),            // Statement-Possession: Tool
        sig({kMMM}),          // Statement-Recipe: Block and Block-Pair
        sig({kT, kM, kMM}),   // Statement-Requirement: Tool or Block or Pair
        sig({kM}),            // Statement-StepDone: Block
        sig({kNone}),         // BACKCHANNEL
        sig({kNone}),         // OPINION
        sig({kNone}),         // AGREEMENT
        sig({kNone}),         // AnsAff
        sig({kNone}),         // CLOSING
        sig({kNone}),         // AnsNeg
        sig({kNone}),         // ACKNOWLEDGMENT
        sig({kNone}),         // AnsOth
        sig({kNone}),         // OPENING
        sig({kNone}),         // OrClause
        sig({kNone}),         // APOLOGY
        sig({kNone}),         // GameSpec
        sig({kNone}),         // other
    };
    return table[static_cast<std::size_t>(c)];
}

const char* kind_name(SlotKind k) {
    switch (k) {
        case SlotKind::Material: return "material";
        case SlotKind::Tool: return "tool";
        case SlotKind::Mine: return "mine";
        case SlotKind::Ignore: return "ignore";
    }
    return "?";
}

}  // namespace

const char* to_string(MoveCategory c) {
    return kCategoryNames[static_cast<std::size_t>(c)];
}

std::optional<MoveCategory> move_category_from_string(const std::string& name) {
    static const std::unordered_map<std::string, MoveCategory> lookup = [] {
        std::unordered_map<std::string, MoveCategory> m;
        for (std::size_t i = 0; i < kMoveCategoryCount; ++i) {
            m.emplace(kCategoryNames[i], static_cast<MoveCategory>(i));
        }
        return m;
    }();
    auto it = lookup.find(name);
    if (it == lookup.end()) return std::nullopt;
    return it->second;
}

MoveGroup group_of(MoveCategory c) {
    auto i = static_cast<std::size_t>(c);
    if (i <= static_cast<std::size_t>(MoveCategory::DirectivePutOn)) return MoveGroup::Directive;
    if (i <= static_cast<std::size_t>(MoveCategory::InquiryRequirement)) return MoveGroup::Inquiry;
    if (i <= static_cast<std::size_t>(MoveCategory::StatementStepDone)) return MoveGroup::Statement;
    return MoveGroup::Generic;
}

std::size_t DialogueMove::filled_slots() const {
    std::size_t n = 0;
    while (n < slots.size() && slots[n].kind != SlotKind::Ignore) ++n;
    return n;
}

const MoveSignature& signature_of(MoveCategory c) { return table_entry(c); }

MoveValidation validate_move(const DialogueMove& m) {
    MoveValidation result;
    const std::size_t filled = m.filled_slots();
    for (std::size_t i = filled; i < m.slots.size(); ++i) {
        if (m.slots[i].kind != SlotKind::Ignore) {
            result.message = "filled slots must be contiguous from slot 0";
            return result;
        }
        if (!m.slots[i].value.empty()) {
            result.message = "ignored slot " + std::to_string(i) + " carries a value";
            return result;
        }
    }
    for (std::size_t i = 0; i < filled; ++i) {
        if (m.slots[i].value.empty()) {
            result.message = "slot " + std::to_string(i) + " has no value";
            return result;
        }
    }
    const MoveSignature& s = signature_of(m.category);
    for (std::size_t alt = 0; alt < s.alternatives.size(); ++alt) {
        const auto& pattern = s.alternatives[alt];
        if (pattern.size() != filled) continue;
        bool match = true;
        for (std::size_t i = 0; i < pattern.size(); ++i) {
            if (m.slots[i].kind != pattern[i]) {
                match = false;
                break;
            }
        }
        if (match) {
            result.ok = true;
            result.matched_alternative = static_cast<int>(alt);
            return result;
        }
    }
    result.message = std::string(to_string(m.category)) + ": slot pattern not in signature";
    return result;
}

SlotVocabulary SlotVocabulary::from_plan(const JointPlan& plan) {
    SlotVocabulary v;
    for (const auto& node : plan.nodes()) {
        v.materials.push_back(node.material);
        if (node.tool && std::find(v.tools.begin(), v.tools.end(), *node.tool) == v.tools.end()) {
            v.tools.push_back(*node.tool);
        }
        if (node.mine && std::find(v.mines.begin(), v.mines.end(), *node.mine) == v.mines.end()) {
            v.mines.push_back(*node.mine);
        }
    }
    std::sort(v.tools.begin(), v.tools.end());
    std::sort(v.mines.begin(), v.mines.end());
    return v;
}

std::size_t SlotVocabulary::slot_index(const Slot& s) const {
    auto find_in = [&](const std::vector<std::string>& pool, std::size_t base) {
        auto it = std::find(pool.begin(), pool.end(), s.value);
        if (it == pool.end()) {
            throw std::out_of_range("slot value not in vocabulary: " + s.value);
        }
        return base + static_cast<std::size_t>(it - pool.begin());
    };
    switch (s.kind) {
        case SlotKind::Material: return find_in(materials, 0);
        case SlotKind::Tool: return find_in(tools, materials.size());
        case SlotKind::Mine: return find_in(mines, materials.size() + tools.size());
        case SlotKind::Ignore: return slot_block_width() - 1;
    }
    throw std::logic_error("bad slot kind");
}

MoveEncoding encode_move(const DialogueMove& m, const SlotVocabulary& vocab) {
    MoveValidation check = validate_move(m);
    if (!check.ok) throw std::invalid_argument("encode_move: " + check.message);

    MoveEncoding enc(vocab.encoding_width(), 0.0);
    enc[static_cast<std::size_t>(m.category)] = 1.0;
    const std::size_t block = vocab.slot_block_width();
    for (std::size_t i = 0; i < 3; ++i) {
        enc[kMoveCategoryCount + i * block + vocab.slot_index(m.slots[i])] = 1.0;
    }
    return enc;
}

DialogueMove decode_move(const MoveEncoding& enc, const SlotVocabulary& vocab) {
    if (enc.size() != vocab.encoding_width()) {
        throw std::invalid_argument("decode_move: encoding width mismatch");
    }
    auto argmax = [&](std::size_t begin, std::size_t len) {
        std::size_t best = 0;
        for (std::size_t i = 1; i < len; ++i) {
            if (enc[begin + i] > enc[begin + best]) best = i;
        }
        return best;
    };

    DialogueMove m;
    m.category = static_cast<MoveCategory>(argmax(0, kMoveCategoryCount));
    const std::size_t block = vocab.slot_block_width();
    const std::size_t n_mat = vocab.materials.size();
    const std::size_t n_tool = vocab.tools.size();
    for (std::size_t i = 0; i < 3; ++i) {
        std::size_t pos = argmax(kMoveCategoryCount + i * block, block);
        if (pos < n_mat) {
            m.slots[i] = Slot::material(vocab.materials[pos]);
        } else if (pos < n_mat + n_tool) {
            m.slots[i] = Slot::tool(vocab.tools[pos - n_mat]);
        } else if (pos + 1 < block) {
            m.slots[i] = Slot::mine(vocab.mines[pos - n_mat - n_tool]);
        } else {
            m.slots[i] = Slot::ignore();
        }
    }
    return m;
}

namespace {

struct Cursor {
    const std::string& text;
    std::size_t pos = 0;

    void skip_ws() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
    }
    bool at_end() {
        skip_ws();
        return pos >= text.size();
    }
    bool peek(char c) {
        skip_ws();
        return pos < text.size() && text[pos] == c;
    }
    bool eat(char c) {
        if (peek(c)) {
            ++pos;
            return true;
        }
        return false;
    }
};

bool label_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
           c == '_' || c == '-';
}

std::string read_label(Cursor& cur) {
    cur.skip_ws();
    std::size_t start = cur.pos;
    while (cur.pos < cur.text.size() && label_char(cur.text[cur.pos])) ++cur.pos;
    return cur.text.substr(start, cur.pos - start);
}

MoveParseResult fail(std::size_t offset, std::string expected) {
    MoveParseResult r;
    r.error = ParseError{offset, std::move(expected)};
    return r;
}

std::optional<SlotKind> kind_from_name(const std::string& s) {
    if (s == "material") return SlotKind::Material;
    if (s == "tool") return SlotKind::Tool;
    if (s == "mine") return SlotKind::Mine;
    return std::nullopt;
}

// Assign kinds to bare slots: first signature alternative consistent with the
// explicit kinds and the slot count wins.
bool infer_kinds(MoveCategory cat, std::vector<Slot>& slots) {
    for (const auto& pattern : signature_of(cat).alternatives) {
        if (pattern.size() != slots.size()) continue;
        bool usable = true;
        for (std::size_t i = 0; i < slots.size(); ++i) {
            if (slots[i].kind != SlotKind::Ignore && slots[i].kind != pattern[i]) {
                usable = false;
                break;
            }
        }
        if (!usable) continue;
        for (std::size_t i = 0; i < slots.size(); ++i) slots[i].kind = pattern[i];
        return true;
    }
    return false;
}

}  // namespace

MoveParseResult parse_move(const std::string& text) {
    Cursor cur{text};
    cur.skip_ws();
    std::size_t cat_offset = cur.pos;
    std::string name = read_label(cur);
    if (name.empty()) return fail(cat_offset, "dialogue move category");
    auto cat = move_category_from_string(name);
    if (!cat) return fail(cat_offset, "dialogue move category");

    std::vector<Slot> slots;
    if (cur.eat('(')) {
        if (!cur.peek(')')) {
            while (true) {
                cur.skip_ws();
                std::size_t slot_offset = cur.pos;
                std::string first = read_label(cur);
                if (first.empty()) return fail(slot_offset, "slot label or kind");
                Slot s;
                if (cur.eat(':')) {
                    auto kind = kind_from_name(first);
                    if (!kind) return fail(slot_offset, "slot kind (material, tool, mine)");
                    cur.skip_ws();
                    std::size_t value_offset = cur.pos;
                    std::string value = read_label(cur);
                    if (value.empty()) return fail(value_offset, "slot label");
                    s.kind = *kind;
                    s.value = value;
                } else {
                    s.kind = SlotKind::Ignore;  // inferred below
                    s.value = first;
                }
                slots.push_back(std::move(s));
                if (slots.size() > 3) return fail(slot_offset, "at most 3 slots");
                if (cur.eat(';')) continue;
                break;
            }
        }
        if (!cur.eat(')')) return fail(cur.pos, "';' or ')'");
    }
    if (!cur.at_end()) return fail(cur.pos, "end of input");

    if (!infer_kinds(*cat, slots)) {
        return fail(cat_offset, std::string("slots matching signature of ") + to_string(*cat));
    }
    DialogueMove m;
    m.category = *cat;
    for (std::size_t i = 0; i < slots.size(); ++i) m.slots[i] = slots[i];
    MoveValidation v = validate_move(m);
    if (!v.ok) return fail(cat_offset, v.message);
    MoveParseResult r;
    r.move = std::move(m);
    return r;
}

std::string serialize_move(const DialogueMove& m) {
    std::string out = to_string(m.category);
    const std::size_t filled = m.filled_slots();
    if (filled > 0) {
        out += '(';
        for (std::size_t i = 0; i < filled; ++i) {
            if (i > 0) out += "; ";
            out += kind_name(m.slots[i].kind);
            out += ':';
            out += m.slots[i].value;
        }
        out += ')';
    }
    return out;
}

MoveDistribution move_distribution(const std::vector<DialogueMove>& moves) {
    MoveDistribution d;
    d.total = moves.size();
    for (const auto& m : moves) ++d.counts[static_cast<std::size_t>(m.category)];
    if (d.total > 0) {
        for (std::size_t i = 0; i < kMoveCategoryCount; ++i) {
            d.frequencies[i] = static_cast<double>(d.counts[i]) / static_cast<double>(d.total);
        }
    }
    return d;
}

}  // namespace planacq
