#include "kgqa/eval/runner.hpp"

#include <chrono>

#include <spdlog/spdlog.h>

#include "kgqa/agents/runtime.hpp"
#include "kgqa/chain/chain.hpp"
#include "kgqa/chain/sanitize.hpp"

namespace kgqa::eval {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// One generation completion, sanitized; no validation, resolution or refinement.
EvalRecord run_single_shot(const app::AppContext& ctx, const EvalQuestion& q, const chain::RefinementStore& store) {
    EvalRecord rec;
    chain::ChainConfig cc;
    cc.model = ctx.config.model;
    cc.prompts = &ctx.prompts;
    cc.schema = &ctx.schema;
    cc.endpoint = ctx.kg;
    cc.store = &store;
    auto complete = ctx.completer();
    cc.complete = complete;
    chain::SparqlChain chain(std::move(cc));
    auto t0 = std::chrono::steady_clock::now();
    auto res = complete(llm::ChatRequest{ctx.config.model, {{"user", chain.build_generation_prompt(q.question, {})}},
                                         0.0, "sparql_generate"});
    auto sanitized = chain::sanitize_query(res.text, &ctx.schema);
    rec.latency_seconds = seconds_since(t0);
    rec.usage = res.usage;
    if (sanitized.ok()) rec.generated_query = *sanitized.query;
    return rec;
}

}  // namespace

EvalRecord run_question(const app::AppContext& ctx, const EvalQuestion& q, const JudgeOptions& judge) {
    const auto store = ctx.store.without(q.question);
    EvalRecord rec;
    std::vector<agents::TraceEvent> trace;
    if (ctx.config.pipeline == app::Pipeline::SingleShot) {
        rec = run_single_shot(ctx, q, store);
    } else {
        agents::Runtime runtime(ctx.runtime_config(&store), ctx.completer());
        agents::SessionState st;
        st.session_id = "eval-" + ctx.config.label + "-" + q.id;
        auto t0 = std::chrono::steady_clock::now();
        runtime.run_turn(st, q.question);
        rec.latency_seconds = seconds_since(t0);
        rec.usage = st.ledger.totals();
        if (st.last_result && !st.last_result->query.empty()) rec.generated_query = st.last_result->query;
        trace = st.trace;
    }
    rec.question_id = q.id;
    rec.configuration = ctx.config.label;
    rec.complexity = q.complexity;
    auto j = judge_answer(q.question, q.reference_query, rec.generated_query, *ctx.kg, judge);
    rec.verdict = j.verdict;
    rec.rationale = j.rationale;
    rec.manual_review = j.manual_review;
    rec.error_type = classify_error(trace, rec.verdict);
    return rec;
}

std::vector<EvalRecord> run_dataset(const app::AppContext& ctx, const std::vector<EvalQuestion>& questions,
                                    const JudgeOptions& judge,
                                    const std::function<void(const EvalRecord&)>& on_record) {
    std::vector<EvalRecord> out;
    for (const auto& q : questions) {
        auto rec = run_question(ctx, q, judge);
        spdlog::info("question {}: {} ({})", q.id, to_string(rec.verdict), to_string(rec.error_type));
        if (on_record) on_record(rec);
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace kgqa::eval
