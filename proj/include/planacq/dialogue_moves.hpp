#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "planacq/plan_graph.hpp"

namespace planacq {

// Closed 35-category move taxonomy. Names are case-sensitive and hyphenated
// exactly as they appear in session logs.
enum class MoveCategory : std::uint8_t {
    DirectiveMake,
    DirectiveOther,
    DirectivePickUp,
    DirectivePutDown,
    DirectivePutOn,
    InquiryAct,
    InquiryGoal,
    InquiryNextStep,
    InquiryOwnAct,
    InquiryPossession,
    InquiryRecipe,
    InquiryRequirement,
    StatementGoal,
    StatementInability,
    StatementLackKnowledge,
    StatementNextStep,
    StatementOther,
    StatementOwnAct,
    StatementPossession,
    StatementRecipe,
    StatementRequirement,
    StatementStepDone,
    Backchannel,
    Opinion,
    Agreement,
    AnsAff,
    Closing,
    AnsNeg,
    Acknowledgment,
    AnsOth,
    Opening,
    OrClause,
    Apology,
    GameSpec,
    Other,
};

inline constexpr std::size_t kMoveCategoryCount = 35;

const char* to_string(MoveCategory c);
std::optional<MoveCategory> move_category_from_string(const std::string& name);

enum class MoveGroup : std::uint8_t { Directive, Inquiry, Statement, Generic };
inline constexpr std::size_t kMoveGroupCount = 4;
MoveGroup group_of(MoveCategory c);

enum class SlotKind : std::uint8_t { Material, Tool, Mine, Ignore };

struct Slot {
    SlotKind kind = SlotKind::Ignore;
    std::string value;  // empty iff kind == Ignore

    static Slot material(std::string v) { return {SlotKind::Material, std::move(v)}; }
    static Slot tool(std::string v) { return {SlotKind::Tool, std::move(v)}; }
    static Slot mine(std::string v) { return {SlotKind::Mine, std::move(v)}; }
    static Slot ignore() { return {}; }

    bool operator==(const Slot&) const = default;
};

struct DialogueMove {
    MoveCategory category = MoveCategory::Backchannel;
    std::array<Slot, 3> slots{};
    AgentId speaker = AgentId::A;
    int turn = 0;

    std::size_t filled_slots() const;
    bool operator==(const DialogueMove&) const = default;
};

// A category's slot signature: the set of slot-kind sequences it accepts.
// Bracketed parameters in the taxonomy are optional, which shows up here as
// an alternative including the empty sequence.
struct MoveSignature {
    std::vector<std::vector<SlotKind>> alternatives;
};

const MoveSignature& signature_of(MoveCategory c);

struct MoveValidation {
    bool ok = false;
    int matched_alternative = -1;  // index into signature alternatives
    std::string message;           // set when !ok
};

MoveValidation validate_move(const DialogueMove& m);

// Slot vocabulary backing the one-hot encoding; also the file schema
// {"materials": [...], "tools": [...], "mines": [...]}.
struct SlotVocabulary {
    std::vector<std::string> materials;
    std::vector<std::string> tools;
    std::vector<std::string> mines;

    static SlotVocabulary from_plan(const JointPlan& plan);

    std::size_t slot_block_width() const {
        return materials.size() + tools.size() + mines.size() + 1;  // +1 ignore
    }
    std::size_t encoding_width() const {
        return kMoveCategoryCount + 3 * slot_block_width();
    }
    // Position of a slot within one block; the ignore position is last.
    std::size_t slot_index(const Slot& s) const;
};

// Four concatenated one-hot blocks: category, then one block per slot.
using MoveEncoding = std::vector<double>;

MoveEncoding encode_move(const DialogueMove& m, const SlotVocabulary& vocab);
DialogueMove decode_move(const MoveEncoding& enc, const SlotVocabulary& vocab);

struct ParseError {
    std::size_t offset = 0;
    std::string expected;
};

struct MoveParseResult {
    std::optional<DialogueMove> move;
    std::optional<ParseError> error;
    bool ok() const { return move.has_value(); }
};

// Grammar: CATEGORY [ '(' slot (';' slot)* ')' ], slot = [kind ':'] label.
// Bare labels take their kind from the first matching signature alternative.
MoveParseResult parse_move(const std::string& text);
std::string serialize_move(const DialogueMove& m);

struct MoveDistribution {
    std::array<std::size_t, kMoveCategoryCount> counts{};
    std::array<double, kMoveCategoryCount> frequencies{};
    std::size_t total = 0;
};

MoveDistribution move_distribution(const std::vector<DialogueMove>& moves);

}  // namespace planacq
