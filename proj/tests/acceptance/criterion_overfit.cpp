// Criterion 6: both desk-scale architectures reach 100% word accuracy on an
// 8-word training set within 500 epochs, and greedy decoding reproduces the
// targets. Budget: 5 CPU minutes.

#include "common.hpp"
#include "strlab/model.hpp"
#include "strlab/stimulus.hpp"
#include "strlab/train.hpp"

namespace acceptance {

using namespace strlab;

bool run_criterion_6() {
  Criterion crit(6, "overfit sanity: 100% on 8 words within 500 epochs, decode reproduces");
  Stopwatch watch;

  WordList words;
  words.words = {"cat", "dog", "be", "zebu", "quill", "fringe", "whiskey", "ox"};
  Dataset ds = build_image_set({"all_words", 606, "train"}, words);

  for (const std::string kind : {"ctc", "attn"}) {
    ModelConfig cfg = ModelConfig::defaults_for(kind);
    cfg.seed = 616;
    cfg.max_epochs = 500;
    cfg.patience = 60;  // stops shortly after accuracy pins at 1.0
    Model model(cfg);

    auto [ckpt, report] = train(model, ds, ds);
    crit.check(report.best_metric == 1.0,
               kind + " reached " + std::to_string(report.best_metric) + " train accuracy (best epoch " +
                   std::to_string(report.best_epoch) + ")");
    crit.check(report.best_epoch > 0 && report.best_epoch <= 500,
               kind + " perfect epoch " + std::to_string(report.best_epoch) + " within 500");

    model.params() = ckpt.best_params;
    auto preds = predict_dataset(model, ds);
    bool all_match = true;
    for (size_t i = 0; i < preds.size(); ++i) all_match &= preds[i] == ds.samples[i].label;
    crit.check(all_match, kind + " greedy decode reproduces all eight targets");
  }

  crit.check(watch.seconds() < 300.0,
             "runtime " + std::to_string(watch.seconds()) + "s < 300s");
  return crit.finish();
}

}  // namespace acceptance
