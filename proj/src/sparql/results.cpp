#include "kgqa/sparql/results.hpp"

#include "kgqa/core/error.hpp"

namespace kgqa::sparql {

using nlohmann::json;

json to_json(const ResultSet& rs) {
    json bindings = json::array();
    for (const auto& row : rs.rows) {
        json b = json::object();
        for (std::size_t i = 0; i < rs.variables.size() && i < row.size(); ++i) {
            if (!row[i]) continue;
            const auto& t = *row[i];
            json cell;
            switch (t.kind) {
                case rdf::TermKind::Iri: cell["type"] = "uri"; break;
                case rdf::TermKind::Blank: cell["type"] = "bnode"; break;
                case rdf::TermKind::Literal:
                    cell["type"] = "literal";
                    if (!t.lang.empty()) {
                        cell["xml:lang"] = t.lang;
                    } else if (t.datatype != rdf::vocab::xsd_string) {
                        cell["datatype"] = t.datatype;
                    }
                    break;
            }
            cell["value"] = t.value;
            b[rs.variables[i]] = std::move(cell);
        }
        bindings.push_back(std::move(b));
    }
    return json{{"head", {{"vars", rs.variables}}}, {"results", {{"bindings", std::move(bindings)}}}};
}

ResultSet from_json(const json& doc) {
    ResultSet rs;
    try {
        for (const auto& v : doc.at("head").at("vars")) rs.variables.push_back(v.get<std::string>());
        for (const auto& b : doc.at("results").at("bindings")) {
            std::vector<Binding> row(rs.variables.size());
            for (std::size_t i = 0; i < rs.variables.size(); ++i) {
                auto it = b.find(rs.variables[i]);
                if (it == b.end()) continue;
                auto type = it->at("type").get<std::string>();
                auto value = it->at("value").get<std::string>();
                if (type == "uri") {
                    row[i] = rdf::Term::iri(value);
                } else if (type == "bnode") {
                    row[i] = rdf::Term::blank(value);
                } else if (type == "literal" || type == "typed-literal") {
                    std::string dt = it->contains("datatype") ? it->at("datatype").get<std::string>() : "";
                    std::string lang = it->contains("xml:lang") ? it->at("xml:lang").get<std::string>() : "";
                    row[i] = rdf::Term::literal(value, dt, lang);
                } else {
                    throw Error(ErrorCode::Parse, "unknown binding type '" + type + "'");
                }
            }
            rs.rows.push_back(std::move(row));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::Parse, std::string("malformed SPARQL JSON results: ") + e.what());
    }
    return rs;
}

csv::Table to_csv_table(const ResultSet& rs) {
    csv::Table table;
    table.header = rs.variables;
    for (const auto& row : rs.rows) {
        csv::Row out;
        for (const auto& cell : row) out.push_back(cell ? cell->value : std::string());
        table.rows.push_back(std::move(out));
    }
    return table;
}

}  // namespace kgqa::sparql
