#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "kgqa/agents/runtime.hpp"
#include "kgqa/chain/prompts.hpp"
#include "kgqa/chain/schema.hpp"
#include "kgqa/chain/store.hpp"
#include "kgqa/eval/harness.hpp"
#include "kgqa/core/http.hpp"
#include "kgqa/llm/cassette.hpp"
#include "kgqa/llm/gateway.hpp"
#include "kgqa/resolvers/local.hpp"

namespace kgqa::app {

enum class Pipeline { Full, SingleShot };
std::string to_string(Pipeline p);
Pipeline parse_pipeline(const std::string& s);

inline constexpr std::size_t kDefaultUploadCap = 50ull * 1024 * 1024;

/// One configuration file. Relative paths resolve against the file's
/// directory. Endpoints are either a URL or "local:<turtle file>".
struct AppConfig {
    std::filesystem::path base_dir;
    std::string label = "default";
    Pipeline pipeline = Pipeline::Full;
    std::string model = "gpt-4o";
    std::string kg_endpoint;
    std::string wikidata_endpoint;
    std::string chembl_base_url = "https://www.ebi.ac.uk/chembl/api/data";
    std::string gnps_base_url = "https://structure.gnps2.org";
    std::filesystem::path schema;
    std::filesystem::path plant_db;
    std::string plant_column = "plant_name";
    std::filesystem::path chemical_index;
    std::filesystem::path refinement_store;  // optional
    std::filesystem::path prompts_dir;
    std::filesystem::path artifact_root;
    std::filesystem::path cassette;       // required in replay and record modes
    std::filesystem::path http_fixtures;  // optional: serve resolver HTTP from canned responses
    llm::Mode mode = llm::Mode::Replay;
    int step_cap = agents::kDefaultStepCap;
    std::size_t upload_cap = kDefaultUploadCap;
    std::vector<eval::Exclusion> exclusions;
    llm::RateTable rates;
};

/// Parses and checks a config file: required keys present, referenced files
/// exist. Throws Error(Config) naming the offending key or path.
/// `mode`, when given, replaces the configured mode before validation.
AppConfig load_config(const std::filesystem::path& path, std::optional<llm::Mode> mode = std::nullopt);
AppConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir);

/// Everything a running pipeline needs, built once and shared read-only.
struct AppContext {
    AppConfig config;
    chain::PromptLibrary prompts;
    chain::SchemaDocument schema;
    resolvers::PlantDb plants;
    std::optional<resolvers::ChemicalIndex> chemicals;
    chain::RefinementStore store;
    std::shared_ptr<http::Transport> transport;  // resolver HTTP
    std::shared_ptr<sparql::Endpoint> kg;
    std::shared_ptr<sparql::Endpoint> wikidata;
    std::shared_ptr<llm::Cassette> cassette;
    std::shared_ptr<llm::Gateway> gateway;

    /// Runtime config over this context; `store` overrides the refinement
    /// store (evaluation withholds the question under test).
    agents::RuntimeConfig runtime_config(const chain::RefinementStore* store = nullptr) const;
    agents::CompleteFn completer() const;
};

struct ContextOverrides {
    std::shared_ptr<llm::Provider> provider;      // live/record; default reads credentials from the environment
    std::shared_ptr<http::Transport> transport;   // resolver and remote endpoint HTTP
    std::function<void(std::chrono::milliseconds)> sleeper;
};

std::unique_ptr<AppContext> build_context(const AppConfig& config, const ContextOverrides& overrides = {});

/// "local:<ttl>" endpoints load the file into memory; anything else is a
/// SPARQL protocol URL.
std::shared_ptr<sparql::Endpoint> make_endpoint(const std::string& spec, const std::filesystem::path& base_dir,
                                                std::shared_ptr<http::Transport> transport);

}  // namespace kgqa::app
