#include "kgqa/app/config.hpp"

#include <spdlog/spdlog.h>

#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"
#include "kgqa/rdf/turtle.hpp"
#include "kgqa/resolvers/remote.hpp"

namespace fs = std::filesystem;

namespace kgqa::app {

std::string to_string(Pipeline p) { return p == Pipeline::SingleShot ? "single_shot" : "full"; }

Pipeline parse_pipeline(const std::string& s) {
    if (s == "full") return Pipeline::Full;
    if (s == "single_shot") return Pipeline::SingleShot;
    throw Error(ErrorCode::Config, "pipeline must be 'full' or 'single_shot', got '" + s + "'");
}

namespace {

fs::path resolve_path(const fs::path& base, const std::string& value) {
    if (value.empty()) return {};
    fs::path p(value);
    return p.is_absolute() ? p : base / p;
}

fs::path path_field(const nlohmann::json& j, const char* key, const fs::path& base, bool required) {
    if (!j.contains(key) || j[key].is_null()) {
        if (required) throw Error(ErrorCode::Config, std::string("config is missing '") + key + "'");
        return {};
    }
    if (!j[key].is_string()) throw Error(ErrorCode::Config, std::string("config key '") + key + "' must be a string");
    return resolve_path(base, j[key].get<std::string>());
}

void require_file(const fs::path& p, const char* key) {
    std::error_code ec;
    if (!p.empty() && !fs::exists(p, ec)) {
        throw Error(ErrorCode::Config, std::string("config key '") + key + "' points to a missing path: " + p.string());
    }
}

void require_local_endpoint(const std::string& spec, const fs::path& base, const char* key) {
    if (spec.rfind("local:", 0) == 0) require_file(resolve_path(base, spec.substr(6)), key);
}

}  // namespace

AppConfig config_from_json(const nlohmann::json& j, const fs::path& base_dir) {
    if (!j.is_object()) throw Error(ErrorCode::Config, "config must be a JSON object");
    AppConfig c;
    c.base_dir = base_dir;
    try {
        c.label = j.value("label", c.label);
        c.pipeline = parse_pipeline(j.value("pipeline", std::string("full")));
        c.model = j.value("model", c.model);
        c.kg_endpoint = j.value("kg_endpoint", "");
        c.wikidata_endpoint = j.value("wikidata_endpoint", "");
        c.chembl_base_url = j.value("chembl_base_url", c.chembl_base_url);
        c.gnps_base_url = j.value("gnps_base_url", c.gnps_base_url);
        c.plant_column = j.value("plant_column", c.plant_column);
        c.mode = llm::parse_mode(j.value("mode", std::string("replay")));
        c.step_cap = j.value("step_cap", c.step_cap);
        c.upload_cap = j.value("upload_cap_bytes", c.upload_cap);
        const auto exclusions = j.value("exclusions", nlohmann::json::array());
        for (const auto& e : exclusions) {
            c.exclusions.push_back({e.at("question_id").get<std::string>(), e.value("reason", "")});
        }
        const auto rates = j.value("rates", nlohmann::json::object());
        for (const auto& [model, r] : rates.items()) {
            c.rates.rates[model] = {r.value("input", 0.0), r.value("output", 0.0)};
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, std::string("bad config value: ") + e.what());
    }
    if (c.kg_endpoint.empty()) throw Error(ErrorCode::Config, "config is missing 'kg_endpoint'");
    if (c.step_cap < 1) throw Error(ErrorCode::Config, "step_cap must be positive");
    c.schema = path_field(j, "schema", base_dir, true);
    c.plant_db = path_field(j, "plant_db", base_dir, true);
    c.chemical_index = path_field(j, "chemical_index", base_dir, true);
    c.refinement_store = path_field(j, "refinement_store", base_dir, false);
    c.prompts_dir = path_field(j, "prompts_dir", base_dir, true);
    c.artifact_root = path_field(j, "artifact_root", base_dir, true);
    c.cassette = path_field(j, "cassette", base_dir, false);
    c.http_fixtures = path_field(j, "http_fixtures", base_dir, false);

    require_file(c.schema, "schema");
    require_file(c.plant_db, "plant_db");
    require_file(c.chemical_index, "chemical_index");
    require_file(c.refinement_store, "refinement_store");
    require_file(c.prompts_dir, "prompts_dir");
    require_file(c.http_fixtures, "http_fixtures");
    require_local_endpoint(c.kg_endpoint, base_dir, "kg_endpoint");
    require_local_endpoint(c.wikidata_endpoint, base_dir, "wikidata_endpoint");
    if (c.mode == llm::Mode::Replay) {
        if (c.cassette.empty()) throw Error(ErrorCode::Config, "replay mode needs 'cassette'");
        require_file(c.cassette, "cassette");
    }
    if (c.mode == llm::Mode::Record && c.cassette.empty()) {
        throw Error(ErrorCode::Config, "record mode needs 'cassette' (the output path)");
    }
    return c;
}

AppConfig load_config(const fs::path& path, std::optional<llm::Mode> mode) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text::read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, "cannot parse config " + path.string() + ": " + e.what());
    }
    if (mode) j["mode"] = std::string(llm::to_string(*mode));
    auto base = fs::absolute(path).parent_path();
    return config_from_json(j, base);
}

std::shared_ptr<sparql::Endpoint> make_endpoint(const std::string& spec, const fs::path& base_dir,
                                                std::shared_ptr<http::Transport> transport) {
    if (spec.empty()) return nullptr;
    if (spec.rfind("local:", 0) == 0) {
        auto path = resolve_path(base_dir, spec.substr(6));
        auto graph = std::make_shared<rdf::Graph>(rdf::load_graph(text::read_file(path)));
        return std::make_shared<sparql::LocalGraphEndpoint>(graph);
    }
    return std::make_shared<sparql::HttpEndpoint>(spec, std::move(transport));
}

std::unique_ptr<AppContext> build_context(const AppConfig& config, const ContextOverrides& overrides) {
    auto ctx = std::make_unique<AppContext>();
    ctx->config = config;
    ctx->prompts = chain::PromptLibrary::load_dir(config.prompts_dir);
    ctx->schema = chain::load_schema(text::read_file(config.schema));
    if (ctx->schema.empty()) throw Error(ErrorCode::Config, "schema " + config.schema.string() + " has no classes");
    ctx->plants = resolvers::PlantDb::load(config.plant_db, config.plant_column);
    ctx->chemicals = resolvers::ChemicalIndex::load(config.chemical_index);
    if (!config.refinement_store.empty()) ctx->store = chain::RefinementStore::load_csv(config.refinement_store);

    if (overrides.transport) {
        ctx->transport = overrides.transport;
    } else if (!config.http_fixtures.empty()) {
        ctx->transport = http::FixtureTransport::load(config.http_fixtures);
    } else {
        ctx->transport = std::make_shared<http::NetworkTransport>();
    }
    ctx->kg = make_endpoint(config.kg_endpoint, config.base_dir, ctx->transport);
    ctx->wikidata = make_endpoint(config.wikidata_endpoint, config.base_dir, ctx->transport);

    llm::GatewayOptions opts;
    opts.mode = config.mode;
    opts.rates = config.rates;
    if (overrides.sleeper) opts.sleeper = overrides.sleeper;
    std::shared_ptr<llm::Provider> provider;
    if (config.mode == llm::Mode::Replay) {
        ctx->cassette = std::make_shared<llm::Cassette>(llm::Cassette::load(config.cassette));
    } else {
        provider = overrides.provider ? overrides.provider
                                      : llm::ChatCompletionsProvider::from_env(std::make_shared<http::NetworkTransport>());
        if (config.mode == llm::Mode::Record) {
            ctx->cassette = std::make_shared<llm::Cassette>();
            opts.record_path = config.cassette;
        }
    }
    ctx->gateway = std::make_shared<llm::Gateway>(std::move(opts), provider, ctx->cassette);
    spdlog::info("pipeline '{}' ready: mode {}, kg {}, {} plants, {} chemical classes, {} exemplars", config.label,
                 llm::to_string(config.mode), ctx->kg->describe(), ctx->plants.size(), ctx->chemicals->entries().size(),
                 ctx->store.size());
    return ctx;
}

agents::RuntimeConfig AppContext::runtime_config(const chain::RefinementStore* override_store) const {
    agents::RuntimeConfig rc;
    rc.topology = agents::default_topology(config.model);
    rc.prompts = &prompts;
    rc.artifact_root = config.artifact_root;
    rc.step_cap = config.step_cap;
    auto& t = rc.tools;
    t.plants = &plants;
    t.chemicals = chemicals ? &*chemicals : nullptr;
    t.smiles = std::make_shared<resolvers::SmilesResolver>(config.gnps_base_url, transport);
    t.targets = std::make_shared<resolvers::TargetResolver>(config.chembl_base_url, transport);
    if (wikidata) t.taxa = std::make_shared<resolvers::TaxonResolver>(wikidata);
    t.kg = kg;
    t.wikidata = wikidata;
    t.schema = &schema;
    t.store = override_store ? override_store : &store;
    return rc;
}

agents::CompleteFn AppContext::completer() const {
    auto gw = gateway;
    return [gw](const llm::ChatRequest& r) { return gw->complete(r); };
}

}  // namespace kgqa::app
