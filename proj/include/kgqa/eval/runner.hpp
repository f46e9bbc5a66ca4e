#pragma once

#include <functional>
#include <vector>

#include "kgqa/app/config.hpp"
#include "kgqa/eval/harness.hpp"

namespace kgqa::eval {

/// Runs one question through the configured pipeline in a fresh session and
/// judges the outcome. The question's own reference query is withheld from
/// the refinement store. Full pipeline latency runs from submission to the
/// terminal answer; single-shot latency from submission to the query text.
EvalRecord run_question(const app::AppContext& ctx, const EvalQuestion& q, const JudgeOptions& judge = {});

/// Sequential run over the dataset; `on_record` sees each record as it
/// completes.
std::vector<EvalRecord> run_dataset(const app::AppContext& ctx, const std::vector<EvalQuestion>& questions,
                                    const JudgeOptions& judge = {},
                                    const std::function<void(const EvalRecord&)>& on_record = {});

}  // namespace kgqa::eval
