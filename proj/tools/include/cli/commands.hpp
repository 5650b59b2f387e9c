#pragma once

#include "cli/options.hpp"

namespace icsel::cli {

// Each command writes its outputs plus a resolved run_config.json into
// out_dir and throws on failure (ContractError family for misuse, IoError
// family for environment problems).
void run_build_index(const BuildIndexOptions& options);
void run_retrieve_rerank(const RetrieveRerankOptions& options);
void run_select_task_prompt(const SelectTaskPromptOptions& options);
void run_translate_eval(const TranslateEvalOptions& options);
void run_ablate_datastore(const AblateOptions& options);

}  // namespace icsel::cli
