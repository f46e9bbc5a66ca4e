#include "kgqa/app/author.hpp"

#include "kgqa/core/error.hpp"
#include "kgqa/core/text.hpp"
#include "kgqa/eval/runner.hpp"
#include "kgqa/llm/provider.hpp"

namespace fs = std::filesystem;

namespace kgqa::app {

namespace {

void push_all(llm::ScriptedProvider& p, const nlohmann::json& responses) {
    for (const auto& r : responses) p.push(r.at("purpose").get<std::string>(), r.at("text").get<std::string>());
}

}  // namespace

AuthorResult author_cassette(AppConfig config, const fs::path& script_path, const fs::path& cassette_out) {
    nlohmann::json script;
    try {
        script = nlohmann::json::parse(text::read_file(script_path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, "bad cassette script " + script_path.string() + ": " + e.what());
    }
    std::error_code ec;
    fs::remove(cassette_out, ec);
    config.mode = llm::Mode::Record;
    config.cassette = cassette_out;
    auto provider = std::make_shared<llm::ScriptedProvider>();
    auto ctx = build_context(config, {provider, nullptr, nullptr});
    AuthorResult out;
    try {
        if (script.contains("eval_dataset")) {
            push_all(*provider, script.at("responses"));
            auto questions = eval::load_dataset(script_path.parent_path() / script["eval_dataset"].get<std::string>());
            for (const auto& rec : eval::run_dataset(*ctx, questions)) {
                out.answers.push_back(rec.generated_query.value_or(""));
            }
        } else {
            agents::Runtime runtime(ctx->runtime_config(), ctx->completer());
            int n = 0;
            for (const auto& session : script.at("sessions")) {
                agents::SessionState st;
                st.session_id = "author-" + std::to_string(++n);
                for (const auto& turn : session.at("turns")) {
                    push_all(*provider, turn.at("responses"));
                    auto msg = runtime.run_turn(st, turn.at("question").get<std::string>());
                    if (msg.kind == agents::MessageKind::Error && msg.body.value("code", "") == "precondition_violation") {
                        throw Error(ErrorCode::Precondition, script_path.string() + ": " + msg.text());
                    }
                    out.answers.push_back(msg.text());
                }
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::Config, "bad cassette script " + script_path.string() + ": " + e.what());
    }
    if (provider->remaining() != 0) {
        throw Error(ErrorCode::Precondition, script_path.string() + ": " + std::to_string(provider->remaining()) +
                                                 " scripted responses were not used");
    }
    out.completions = static_cast<std::size_t>(ctx->gateway->completions());
    ctx->gateway->cassette()->save(cassette_out);
    return out;
}

}  // namespace kgqa::app
