// Copyright 2026 The rankdistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Distills a noisy synthetic teacher into a small bilinear student and reports
// held-out pairwise agreement before and after training, for each loss.

#include <cstdio>

#include "rankdistill/selection.hpp"
#include "rankdistill/student.hpp"
#include "rankdistill/synth.hpp"

using namespace rankdistill;

int main() {
  synth::WorldConfig wc;
  wc.embed_dim = 8;
  wc.n_topics = 4;
  wc.n_subtopics = 1;
  wc.subtopic_spread = 0;
  wc.doc_noise = 0.3;
  wc.teacher_scale = 20;
  wc.teacher_temp = 0.5;
  wc.n_queries = 200;
  const auto world = synth::generate(wc);
  const auto emb = world.embeddings();
  const synth::Teacher teacher(wc, emb);
  const CorpusHandles handles{nullptr, teacher, &world.doc_ids, &emb, {}};

  SamplerSpec sampler;
  sampler.kind = SamplerKind::random;
  auto groups_for = [&](const std::vector<QueryId>& qids) {
    std::vector<TrainingGroup> out;
    for (const auto& qid : qids) {
      const auto q = world.query_index(qid);
      TrainingGroup g;
      g.query_id = qid;
      g.doc_ids.push_back(synth::oracle_ranking(world, q, 1)[0].doc);
      for (const auto& d : sample_negatives(sampler, {qid, world.query_text[q]}, g.doc_ids[0], handles))
        g.doc_ids.push_back(d);
      g.positive_index = 0;
      std::vector<double> t;
      for (const auto& d : g.doc_ids) t.push_back(teacher(qid, d));
      g.teacher_scores = std::move(t);
      out.push_back(std::move(g));
    }
    return out;
  };
  const auto [train_q, test_q] = synth::split_queries(world.query_ids, 0.2, wc.seed);
  const auto train_groups = groups_for(train_q), test_groups = groups_for(test_q);

  const auto init = StudentScorer::init(StudentKind::biencoder, wc.embed_dim, 8, 1);
  std::printf("untrained agreement %.4f\n", pairwise_agreement(init, test_groups, emb));
  for (auto loss : {LossKind::kl, LossKind::margin_mse, LossKind::ranknet}) {
    TrainConfig tc;
    tc.loss = loss;
    tc.peak_lr = 0.03;
    const auto res = train(init, train_groups, emb, tc);
    std::printf("%-10s agreement %.4f  final loss %.4f\n", to_string(loss).c_str(),
                pairwise_agreement(res.model, test_groups, emb), res.loss_trace.back());
  }
}
