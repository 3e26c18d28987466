#include "bdc/chain_io.hpp"

#include <fstream>
#include <set>
#include <sstream>
#include <utility>

namespace bdc {
namespace {

using nlohmann::json;

void require_fields(const json& obj, const std::set<std::string>& required,
                    const std::set<std::string>& optional, const std::string& where) {
    for (const auto& item : obj.items()) {
        if (!required.contains(item.key()) && !optional.contains(item.key()))
            throw SpecError("unknown field \"" + item.key() + "\" in " + where);
    }
    for (const auto& key : required) {
        if (!obj.contains(key))
            throw SpecError("missing required parameter \"" + key + "\" in " + where);
    }
}

// A probability literal: "a/b" string (exact) or JSON number (float). `snap`
// recovers the intended small rational from a number, so that
// {"p": 0.6666666666666666} means 2/3; tables skip the snap and stay in float
// mode instead.
struct ParsedNumber {
    Rational value;
    bool was_string = false;
};

ParsedNumber parse_number(const json& v, const std::string& where, bool snap) {
    if (v.is_string()) {
        try {
            return {parse_rational(v.get<std::string>()), true};
        } catch (const std::invalid_argument& e) {
            throw SpecError(std::string(e.what()) + " in " + where);
        }
    }
    if (v.is_number()) {
        const double x = v.get<double>();
        return {snap ? snap_to_rational(x) : Rational(x), false};
    }
    throw SpecError("expected a number or \"a/b\" string in " + where);
}

Rational parse_probability(const json& v, const std::string& where, bool snap) {
    const Rational p = parse_number(v, where, snap).value;
    if (p <= 0 || p >= 1) throw SpecError("p out of range in " + where + ": need 0 < p < 1");
    return p;
}

// Rows are [l, r] pairs; entries may sit anywhere in [0, 1] here — strict
// positivity and normalization are validate()'s job, not the parser's.
std::vector<RatPair> parse_rows(const json& arr, const std::string& where, bool snap,
                                bool* all_exact) {
    if (!arr.is_array()) throw SpecError(where + " must be an array of [l, r] pairs");
    std::vector<RatPair> rows;
    rows.reserve(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        const json& row = arr[i];
        const std::string row_where = where + "[" + std::to_string(i) + "]";
        if (!row.is_array() || row.size() != 2)
            throw SpecError(row_where + " must be a [l, r] pair");
        ParsedNumber l = parse_number(row[0], row_where, snap);
        ParsedNumber r = parse_number(row[1], row_where, snap);
        for (const auto* side : {&l, &r}) {
            if (side->value < 0 || side->value > 1)
                throw SpecError("probability out of range in " + row_where);
        }
        if (all_exact) *all_exact = *all_exact && l.was_string && r.was_string;
        rows.push_back({std::move(l.value), std::move(r.value)});
    }
    return rows;
}

TailRule parse_tail(const json& obj) {
    if (!obj.is_object()) throw SpecError("tail must be an object with a \"rule\" field");
    if (!obj.contains("rule")) throw SpecError("missing required parameter \"rule\" in tail");
    const std::string rule = obj.at("rule").is_string() ? obj.at("rule").get<std::string>() : "";
    TailRule tail;
    if (rule == "constant-half") {
        require_fields(obj, {"rule"}, {}, "tail");
        tail.kind = TailRule::Kind::ConstantHalf;
    } else if (rule == "constant") {
        require_fields(obj, {"rule", "p"}, {}, "tail");
        tail.kind = TailRule::Kind::ConstantDrift;
        tail.up = parse_probability(obj.at("p"), "tail.p", /*snap=*/true);
    } else if (rule == "repeat-last") {
        require_fields(obj, {"rule"}, {}, "tail");
        tail.kind = TailRule::Kind::RepeatLast;
    } else {
        throw SpecError("unknown tail rule \"" + rule + "\"");
    }
    return tail;
}

std::vector<Rational> parse_coeffs(const json& arr, const std::string& where) {
    if (!arr.is_array() || arr.empty())
        throw SpecError(where + " must be a nonempty array of coefficients");
    std::vector<Rational> coeffs;
    for (std::size_t i = 0; i < arr.size(); ++i)
        coeffs.push_back(parse_number(arr[i], where + "[" + std::to_string(i) + "]",
                                      /*snap=*/true)
                             .value);
    return coeffs;
}

json number_to_json(const Rational& v) { return json(format_rational(v)); }

json rows_to_json(const std::vector<RatPair>& rows, bool exact) {
    json arr = json::array();
    for (const auto& row : rows) {
        if (exact) {
            arr.push_back({format_rational(row.left), format_rational(row.right)});
        } else {
            arr.push_back({to_double(row.left), to_double(row.right)});
        }
    }
    return arr;
}

}  // namespace

ChainSpec parse_spec(const json& document) {
    if (!document.is_object()) throw SpecError("malformed document: expected a JSON object");
    if (!document.contains("family"))
        throw SpecError("missing required parameter \"family\" in chain spec");
    if (!document.at("family").is_string())
        throw SpecError("family must be a string tag");
    const std::string family = document.at("family").get<std::string>();

    auto get_k = [&document]() -> std::int64_t {
        const json& k = document.at("k");
        if (!k.is_number_integer() || k.get<std::int64_t>() < 1)
            throw SpecError("k must be an integer >= 1");
        return k.get<std::int64_t>();
    };
    std::string name;
    if (document.contains("name")) {
        if (!document.at("name").is_string()) throw SpecError("name must be a string");
        name = document.at("name").get<std::string>();
    }

    if (family == "simple-symmetric") {
        require_fields(document, {"family", "k"}, {"name"}, "chain spec");
        return ChainSpec(SimpleSymmetricFamily{}, get_k(), name);
    }
    if (family == "constant") {
        require_fields(document, {"family", "k", "p"}, {"name"}, "chain spec");
        return ChainSpec(ConstantDriftFamily{parse_probability(document.at("p"), "p", true)},
                         get_k(), name);
    }
    if (family == "example1") {
        require_fields(document, {"family", "k"}, {"name"}, "chain spec");
        return ChainSpec(Example1Family{}, get_k(), name);
    }
    if (family == "example1-mirrored") {
        require_fields(document, {"family", "k"}, {"name"}, "chain spec");
        return ChainSpec(Example1MirroredFamily{}, get_k(), name);
    }
    if (family == "eventually-constant") {
        require_fields(document, {"family", "k", "M", "prefix"}, {"name"}, "chain spec");
        const json& m = document.at("M");
        if (!m.is_number_integer() || m.get<std::int64_t>() < 1)
            throw SpecError("M must be an integer >= 1");
        auto prefix = parse_rows(document.at("prefix"), "prefix", /*snap=*/true, nullptr);
        if (static_cast<std::int64_t>(prefix.size()) != m.get<std::int64_t>())
            throw SpecError("prefix length must equal M");
        return ChainSpec(EventuallyConstantFamily{std::move(prefix)}, get_k(), name);
    }
    if (family == "table") {
        require_fields(document, {"family", "k", "table", "tail"}, {"name"}, "chain spec");
        bool exact = true;
        auto rows = parse_rows(document.at("table"), "table", /*snap=*/false, &exact);
        if (rows.empty()) throw SpecError("table must contain at least one row");
        TailRule tail = parse_tail(document.at("tail"));
        return ChainSpec(make_table_family(std::move(rows), tail, exact), get_k(), name);
    }
    if (family == "rational-expression") {
        require_fields(document, {"family", "k", "num", "den"}, {"name"}, "chain spec");
        auto num = parse_coeffs(document.at("num"), "num");
        auto den = parse_coeffs(document.at("den"), "den");
        bool den_nonzero = false;
        for (const auto& c : den) den_nonzero = den_nonzero || c != 0;
        if (!den_nonzero) throw SpecError("den must be a nonzero polynomial");
        return ChainSpec(make_rational_expression_family(std::move(num), std::move(den)),
                         get_k(), name);
    }
    throw SpecError("unknown family tag \"" + family + "\"");
}

ChainSpec parse_spec_text(const std::string& text) {
    json document;
    try {
        document = json::parse(text);
    } catch (const json::parse_error& e) {
        throw SpecError(std::string("malformed document: ") + e.what());
    }
    return parse_spec(document);
}

ChainSpec load_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("cannot open chain spec file: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_spec_text(buffer.str());
}

nlohmann::ordered_json serialize_spec(const ChainSpec& spec) {
    nlohmann::ordered_json doc;
    std::visit(
        [&doc](const auto& fam) {
            using F = std::decay_t<decltype(fam)>;
            if constexpr (std::same_as<F, SimpleSymmetricFamily>) {
                doc["family"] = "simple-symmetric";
            } else if constexpr (std::same_as<F, ConstantDriftFamily>) {
                doc["family"] = "constant";
            } else if constexpr (std::same_as<F, Example1Family>) {
                doc["family"] = "example1";
            } else if constexpr (std::same_as<F, Example1MirroredFamily>) {
                doc["family"] = "example1-mirrored";
            } else if constexpr (std::same_as<F, EventuallyConstantFamily>) {
                doc["family"] = "eventually-constant";
            } else if constexpr (std::same_as<F, TableFamily>) {
                doc["family"] = "table";
            } else {
                doc["family"] = "rational-expression";
            }
        },
        spec.family());
    doc["k"] = spec.start_state();
    if (!spec.name().empty()) doc["name"] = spec.name();
    std::visit(
        [&doc](const auto& fam) {
            using F = std::decay_t<decltype(fam)>;
            if constexpr (std::same_as<F, ConstantDriftFamily>) {
                doc["p"] = number_to_json(fam.up);
            } else if constexpr (std::same_as<F, EventuallyConstantFamily>) {
                doc["M"] = fam.prefix.size();
                doc["prefix"] = rows_to_json(fam.prefix, /*exact=*/true);
            } else if constexpr (std::same_as<F, TableFamily>) {
                doc["table"] = rows_to_json(fam.rows, fam.exact);
                nlohmann::ordered_json tail;
                switch (fam.tail.kind) {
                    case TailRule::Kind::ConstantHalf: tail["rule"] = "constant-half"; break;
                    case TailRule::Kind::ConstantDrift:
                        tail["rule"] = "constant";
                        tail["p"] = number_to_json(fam.tail.up);
                        break;
                    case TailRule::Kind::RepeatLast: tail["rule"] = "repeat-last"; break;
                }
                doc["tail"] = tail;
            } else if constexpr (std::same_as<F, RationalExpressionFamily>) {
                nlohmann::ordered_json num = nlohmann::ordered_json::array();
                nlohmann::ordered_json den = nlohmann::ordered_json::array();
                for (const auto& c : fam.num) num.push_back(format_rational(c));
                for (const auto& c : fam.den) den.push_back(format_rational(c));
                doc["num"] = num;
                doc["den"] = den;
            }
        },
        spec.family());
    return doc;
}

bool operator==(const ChainSpec& a, const ChainSpec& b) {
    if (a.start_state() != b.start_state() || a.name() != b.name()) return false;
    if (a.family().index() != b.family().index()) return false;
    auto rows_equal = [](const std::vector<RatPair>& x, const std::vector<RatPair>& y) {
        if (x.size() != y.size()) return false;
        for (std::size_t i = 0; i < x.size(); ++i)
            if (x[i].left != y[i].left || x[i].right != y[i].right) return false;
        return true;
    };
    if (const auto* ca = std::get_if<ConstantDriftFamily>(&a.family()))
        return ca->up == std::get<ConstantDriftFamily>(b.family()).up;
    if (const auto* ea = std::get_if<EventuallyConstantFamily>(&a.family()))
        return rows_equal(ea->prefix, std::get<EventuallyConstantFamily>(b.family()).prefix);
    if (const auto* ta = std::get_if<TableFamily>(&a.family())) {
        const auto& tb = std::get<TableFamily>(b.family());
        return ta->exact == tb.exact && ta->tail.kind == tb.tail.kind &&
               ta->tail.up == tb.tail.up && rows_equal(ta->rows, tb.rows);
    }
    if (const auto* ra = std::get_if<RationalExpressionFamily>(&a.family())) {
        const auto& rb = std::get<RationalExpressionFamily>(b.family());
        return ra->num == rb.num && ra->den == rb.den;
    }
    return true;  // parameterless families
}

}  // namespace bdc
