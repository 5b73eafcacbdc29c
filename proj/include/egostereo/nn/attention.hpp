#pragma once

#include <cmath>
#include <limits>
#include <memory>

#include "egostereo/nn/tape.hpp"

namespace egostereo::nn {

// Scaled dot-product attention over `batch` independent blocks.
//   q: (batch*nq, d)   k, v: (batch*nk, d)   out: (batch*nq, d)
// add_mask (optional, length batch*nk) is added to the logits. A value of
// -inf removes the key outright: it is skipped when taking the row max and
// the exponential sum, its weight is exactly 0, and no gradient flows into
// it. That makes the output bit-identical for any finite content stored at
// masked positions, which is the property the padding mask relies on.
//
// Projections are ordinary `linear` ops around this core.
template <class S>
int attention_core(Tape<S>& t, int q, int k, int v, int batch, int heads,
                   std::type_identity_t<std::shared_ptr<const Tensor<S>>> add_mask) {
  const auto& qv = t.val(q);
  const auto& kv = t.val(k);
  const auto& vv = t.val(v);
  if (qv.ndim() != 2 || kv.ndim() != 2 || vv.ndim() != 2) {
    throw ShapeError("attention_core: want 2-d token matrices");
  }
  const int d = qv.dim(1);
  if (kv.dim(1) != d || vv.dim(1) != d) {
    throw ShapeError("attention_core: feature width mismatch");
  }
  if (batch < 1 || qv.dim(0) % batch || kv.dim(0) % batch ||
      kv.dim(0) != vv.dim(0)) {
    throw ShapeError("attention_core: rows not divisible into batch blocks");
  }
  if (heads < 1 || d % heads) {
    throw ShapeError("attention_core: head count must divide width");
  }
  const int nq = qv.dim(0) / batch;
  const int nk = kv.dim(0) / batch;
  const int dh = d / heads;
  if (add_mask && add_mask->size() != static_cast<std::int64_t>(batch) * nk) {
    throw ShapeError("attention_core: mask length mismatch");
  }
  const S scale = S(1) / std::sqrt(static_cast<S>(dh));
  const S neg_inf = -std::numeric_limits<S>::infinity();

  // Attention weights kept for backward: (batch*heads*nq, nk).
  auto probs = std::make_shared<MatRM<S>>(
      static_cast<Eigen::Index>(batch) * heads * nq, nk);
  Tensor<S> out({batch * nq, d});
  out.data.setZero();

  for (int bidx = 0; bidx < batch; ++bidx) {
    const auto qb = qv.mat2d().middleRows(bidx * nq, nq);
    const auto kb = kv.mat2d().middleRows(bidx * nk, nk);
    const auto vb = vv.mat2d().middleRows(bidx * nk, nk);
    const S* mask = add_mask ? add_mask->ptr() + static_cast<Eigen::Index>(bidx) * nk
                             : nullptr;
    for (int hh = 0; hh < heads; ++hh) {
      MatRM<S> scores(nq, nk);
      scores.noalias() =
          (qb.middleCols(hh * dh, dh) * kb.middleCols(hh * dh, dh).transpose()) *
          scale;
      auto pb = probs->middleRows(
          (static_cast<Eigen::Index>(bidx) * heads + hh) * nq, nq);
      for (int i = 0; i < nq; ++i) {
        S mx = neg_inf;
        for (int j = 0; j < nk; ++j) {
          if (mask && mask[j] == neg_inf) continue;
          const S s = mask ? scores(i, j) + mask[j] : scores(i, j);
          if (s > mx) mx = s;
        }
        if (mx == neg_inf) {
          throw ShapeError("attention_core: a query row has every key masked");
        }
        S sum = S(0);
        for (int j = 0; j < nk; ++j) {
          if (mask && mask[j] == neg_inf) {
            pb(i, j) = S(0);
            continue;
          }
          const S s = mask ? scores(i, j) + mask[j] : scores(i, j);
          const S e = std::exp(s - mx);
          pb(i, j) = e;
          sum += e;
        }
        pb.row(i) /= sum;
      }
      out.mat2d()
          .middleRows(bidx * nq, nq)
          .middleCols(hh * dh, dh)
          .noalias() = pb * vb.middleCols(hh * dh, dh);
    }
  }

  const bool need = t.needs_grad(q) || t.needs_grad(k) || t.needs_grad(v);
  return t.emit(
      std::move(out), need,
      [q, k, v, batch, heads, nq, nk, dh, scale, probs](Tape<S>& t, int o) {
        const auto& qv = t.val(q);
        const auto& kv = t.val(k);
        const auto& vv = t.val(v);
        const auto go = t.grad(o).mat2d();
        for (int bidx = 0; bidx < batch; ++bidx) {
          const auto qb = qv.mat2d().middleRows(bidx * nq, nq);
          const auto kb = kv.mat2d().middleRows(bidx * nk, nk);
          const auto vb = vv.mat2d().middleRows(bidx * nk, nk);
          for (int hh = 0; hh < heads; ++hh) {
            const auto pb = probs->middleRows(
                (static_cast<Eigen::Index>(bidx) * heads + hh) * nq, nq);
            const auto gb = go.middleRows(bidx * nq, nq).middleCols(hh * dh, dh);
            if (t.needs_grad(v)) {
              t.grad(v)
                  .mat2d()
                  .middleRows(bidx * nk, nk)
                  .middleCols(hh * dh, dh)
                  .noalias() += pb.transpose() * gb;
            }
            if (!t.needs_grad(q) && !t.needs_grad(k)) continue;
            MatRM<S> dp(nq, nk);
            dp.noalias() = gb * vb.middleCols(hh * dh, dh).transpose();
            // softmax backward; rows of pb are exactly 0 at masked keys, so
            // dscores vanishes there too.
            MatRM<S> ds(nq, nk);
            for (int i = 0; i < nq; ++i) {
              const S dot = dp.row(i).dot(pb.row(i));
              ds.row(i) =
                  pb.row(i).array() * (dp.row(i).array() - dot);
            }
            ds *= scale;
            if (t.needs_grad(q)) {
              t.grad(q)
                  .mat2d()
                  .middleRows(bidx * nq, nq)
                  .middleCols(hh * dh, dh)
                  .noalias() += ds * kb.middleCols(hh * dh, dh);
            }
            if (t.needs_grad(k)) {
              t.grad(k)
                  .mat2d()
                  .middleRows(bidx * nk, nk)
                  .middleCols(hh * dh, dh)
                  .noalias() += ds.transpose() * qb.middleCols(hh * dh, dh);
            }
          }
        }
      });
}

}  // namespace egostereo::nn
