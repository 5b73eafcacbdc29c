#pragma once

#include <cmath>
#include <memory>
#include <vector>

#include "egostereo/nn/tape.hpp"

namespace egostereo::nn {

template <class S>
int add(Tape<S>& t, int a, int b) {
  check_same_shape(t.val(a), t.val(b), "add");
  Tensor<S> out = t.val(a);
  out.data += t.val(b).data;
  const bool need = t.needs_grad(a) || t.needs_grad(b);
  return t.emit(std::move(out), need, [a, b](Tape<S>& t, int o) {
    const auto& g = t.grad(o).data;
    if (t.needs_grad(a)) t.grad(a).data += g;
    if (t.needs_grad(b)) t.grad(b).data += g;
  });
}

template <class S>
int scale(Tape<S>& t, int a, S k) {
  Tensor<S> out = t.val(a);
  out.data *= k;
  return t.emit(std::move(out), t.needs_grad(a), [a, k](Tape<S>& t, int o) {
    if (t.needs_grad(a)) t.grad(a).data += k * t.grad(o).data;
  });
}

template <class S>
int relu(Tape<S>& t, int a) {
  Tensor<S> out = t.val(a);
  out.data = out.data.cwiseMax(S(0));
  return t.emit(std::move(out), t.needs_grad(a), [a](Tape<S>& t, int o) {
    if (!t.needs_grad(a)) return;
    const auto& x = t.val(a).data;
    t.grad(a).data.array() +=
        t.grad(o).data.array() * (x.array() > S(0)).template cast<S>();
  });
}

// y = x W^T + b with x:(R,in), W:(out,in), b:(out). Pass b = -1 to skip.
template <class S>
int linear(Tape<S>& t, int x, int w, int b) {
  const auto& xv = t.val(x);
  const auto& wv = t.val(w);
  if (xv.ndim() != 2 || wv.ndim() != 2 || xv.dim(1) != wv.dim(1)) {
    throw ShapeError("linear: want x (R,in), W (out,in); got " +
                     xv.shape_str() + " and " + wv.shape_str());
  }
  const int rows = xv.dim(0);
  const int out_dim = wv.dim(0);
  Tensor<S> out({rows, out_dim});
  out.mat2d().noalias() = xv.mat2d() * wv.mat2d().transpose();
  if (b >= 0) {
    const auto& bv = t.val(b);
    if (bv.size() != out_dim) throw ShapeError("linear: bias size mismatch");
    out.mat2d().rowwise() += bv.data.transpose();
  }
  const bool need =
      t.needs_grad(x) || t.needs_grad(w) || (b >= 0 && t.needs_grad(b));
  return t.emit(std::move(out), need, [x, w, b](Tape<S>& t, int o) {
    const auto g = t.grad(o).mat2d();
    if (t.needs_grad(x)) {
      t.grad(x).mat2d().noalias() += g * t.val(w).mat2d();
    }
    if (t.needs_grad(w)) {
      t.grad(w).mat2d().noalias() += g.transpose() * t.val(x).mat2d();
    }
    if (b >= 0 && t.needs_grad(b)) {
      t.grad(b).data += g.colwise().sum().transpose();
    }
  });
}

template <class S>
int reshape(Tape<S>& t, int a, std::vector<int> shp) {
  Tensor<S> out = t.val(a);
  if (Tensor<S>::count(shp) != out.size()) {
    throw ShapeError("reshape: element count mismatch");
  }
  out.shape = std::move(shp);
  return t.emit(std::move(out), t.needs_grad(a), [a](Tape<S>& t, int o) {
    if (t.needs_grad(a)) t.grad(a).data += t.grad(o).data;
  });
}

// Stacks 2-d blocks on top of each other (all must share the column count).
template <class S>
int concat_rows(Tape<S>& t, const std::vector<int>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows: no inputs");
  const int cols = t.val(parts[0]).dim(1);
  int rows = 0;
  bool need = false;
  for (int p : parts) {
    const auto& v = t.val(p);
    if (v.ndim() != 2 || v.dim(1) != cols) {
      throw ShapeError("concat_rows: column mismatch");
    }
    rows += v.dim(0);
    need = need || t.needs_grad(p);
  }
  Tensor<S> out({rows, cols});
  int r = 0;
  for (int p : parts) {
    const auto& v = t.val(p);
    out.mat2d().middleRows(r, v.dim(0)) = v.mat2d();
    r += v.dim(0);
  }
  auto parts_copy = parts;
  return t.emit(std::move(out), need,
                [parts_copy](Tape<S>& t, int o) {
                  const auto g = t.grad(o).mat2d();
                  int r = 0;
                  for (int p : parts_copy) {
                    const int n = t.val(p).dim(0);
                    if (t.needs_grad(p)) {
                      t.grad(p).mat2d() += g.middleRows(r, n);
                    }
                    r += n;
                  }
                });
}

template <class S>
int slice_rows(Tape<S>& t, int a, int row0, int rows) {
  const auto& v = t.val(a);
  if (v.ndim() != 2 || row0 < 0 || row0 + rows > v.dim(0)) {
    throw ShapeError("slice_rows: range out of bounds");
  }
  Tensor<S> out({rows, v.dim(1)});
  out.mat2d() = v.mat2d().middleRows(row0, rows);
  return t.emit(std::move(out), t.needs_grad(a),
                [a, row0, rows](Tape<S>& t, int o) {
                  if (t.needs_grad(a)) {
                    t.grad(a).mat2d().middleRows(row0, rows) +=
                        t.grad(o).mat2d();
                  }
                });
}

// out.row(i) = table.row(idx[i]); rows may repeat (backward scatter-adds),
// which doubles as broadcast/tile.
template <class S>
int gather_rows(Tape<S>& t, int table, std::shared_ptr<const std::vector<int>> idx) {
  const auto& v = t.val(table);
  if (v.ndim() != 2) throw ShapeError("gather_rows: table must be 2-d");
  Tensor<S> out({static_cast<int>(idx->size()), v.dim(1)});
  for (std::size_t i = 0; i < idx->size(); ++i) {
    const int r = (*idx)[i];
    if (r < 0 || r >= v.dim(0)) throw ShapeError("gather_rows: index range");
    out.mat2d().row(static_cast<Eigen::Index>(i)) = v.mat2d().row(r);
  }
  return t.emit(std::move(out), t.needs_grad(table),
                [table, idx](Tape<S>& t, int o) {
                  if (!t.needs_grad(table)) return;
                  auto g = t.grad(table).mat2d();
                  const auto go = t.grad(o).mat2d();
                  for (std::size_t i = 0; i < idx->size(); ++i) {
                    g.row((*idx)[i]) += go.row(static_cast<Eigen::Index>(i));
                  }
                });
}

// (N,C,H,W) -> (N,C): mean over the spatial extent.
template <class S>
int global_avg_pool(Tape<S>& t, int x) {
  const auto& v = t.val(x);
  if (v.ndim() != 4) throw ShapeError("global_avg_pool: want NCHW");
  const int n = v.dim(0), c = v.dim(1);
  const Eigen::Index hw = static_cast<Eigen::Index>(v.dim(2)) * v.dim(3);
  Tensor<S> out({n, c});
  out.data = v.mat(static_cast<Eigen::Index>(n) * c, hw).rowwise().mean();
  return t.emit(std::move(out), t.needs_grad(x),
                [x, hw](Tape<S>& t, int o) {
                  if (!t.needs_grad(x)) return;
                  const auto& go = t.grad(o).data;
                  auto gx = t.grad(x).mat(go.size(), hw);
                  gx.colwise() += go / static_cast<S>(hw);
                });
}

// (N,C,H,W) -> (N*H*W, C): one feature row per spatial location. Token
// order is n-major, then y, then x.
template <class S>
int nchw_to_tokens(Tape<S>& t, int x) {
  const auto& v = t.val(x);
  if (v.ndim() != 4) throw ShapeError("nchw_to_tokens: want NCHW");
  const int n = v.dim(0), c = v.dim(1);
  const Eigen::Index hw = static_cast<Eigen::Index>(v.dim(2)) * v.dim(3);
  Tensor<S> out({static_cast<int>(n * hw), c});
  for (int i = 0; i < n; ++i) {
    ConstMatMap<S> in(v.ptr() + static_cast<Eigen::Index>(i) * c * hw, c, hw);
    MatMap<S> dst(out.ptr() + i * hw * c, hw, c);
    dst = in.transpose();
  }
  return t.emit(std::move(out), t.needs_grad(x),
                [x, n, c, hw](Tape<S>& t, int o) {
                  if (!t.needs_grad(x)) return;
                  auto& gx = t.grad(x);
                  const auto& go = t.grad(o);
                  for (int i = 0; i < n; ++i) {
                    MatMap<S> dst(gx.ptr() + static_cast<Eigen::Index>(i) * c * hw, c, hw);
                    ConstMatMap<S> src(go.ptr() + i * hw * c, hw, c);
                    dst += src.transpose();
                  }
                });
}

// Row-wise layer norm over the last dimension with learned gain/bias.
template <class S>
int layernorm(Tape<S>& t, int x, int gamma, int beta, S eps = S(1e-5)) {
  const auto& xv = t.val(x);
  if (xv.ndim() != 2) throw ShapeError("layernorm: want (R,C)");
  const int rows = xv.dim(0), cols = xv.dim(1);
  if (t.val(gamma).size() != cols || t.val(beta).size() != cols) {
    throw ShapeError("layernorm: gain/bias size mismatch");
  }
  auto xhat = std::make_shared<MatRM<S>>(rows, cols);
  auto inv_std = std::make_shared<VecX<S>>(rows);
  Tensor<S> out({rows, cols});
  {
    const auto xm = xv.mat2d();
    const auto& gv = t.val(gamma).data;
    const auto& bv = t.val(beta).data;
    for (int r = 0; r < rows; ++r) {
      const S mu = xm.row(r).mean();
      const S var = (xm.row(r).array() - mu).square().mean();
      const S istd = S(1) / std::sqrt(var + eps);
      (*inv_std)[r] = istd;
      xhat->row(r) = (xm.row(r).array() - mu) * istd;
      out.mat2d().row(r) =
          xhat->row(r).cwiseProduct(gv.transpose()) + bv.transpose();
    }
  }
  const bool need =
      t.needs_grad(x) || t.needs_grad(gamma) || t.needs_grad(beta);
  return t.emit(std::move(out), need,
                [x, gamma, beta, xhat, inv_std](Tape<S>& t, int o) {
                  const auto go = t.grad(o).mat2d();
                  const int rows = static_cast<int>(go.rows());
                  const Eigen::Index cols = go.cols();
                  if (t.needs_grad(beta)) {
                    t.grad(beta).data += go.colwise().sum().transpose();
                  }
                  if (t.needs_grad(gamma)) {
                    t.grad(gamma).data += (go.array() * xhat->array())
                                              .colwise()
                                              .sum()
                                              .matrix()
                                              .transpose();
                  }
                  if (!t.needs_grad(x)) return;
                  const auto& gv = t.val(gamma).data;
                  auto gx = t.grad(x).mat2d();
                  for (int r = 0; r < rows; ++r) {
                    // d xhat
                    const Eigen::Array<S, 1, Eigen::Dynamic> dxh =
                        go.row(r).array() * gv.transpose().array();
                    const S m1 = dxh.mean();
                    const S m2 = (dxh * xhat->row(r).array()).mean();
                    gx.row(r).array() +=
                        (*inv_std)[r] *
                        (dxh - m1 - xhat->row(r).array() * m2);
                  }
                  (void)cols;
                });
}

// Mean squared error against a constant target, over every element.
template <class S>
int mse_loss(Tape<S>& t, int pred, const Tensor<S>& target) {
  const auto& pv = t.val(pred);
  check_same_shape(pv, target, "mse_loss");
  if (pv.size() == 0) throw ShapeError("mse_loss: empty tensors");
  auto tgt = std::make_shared<Tensor<S>>(target);
  const S n = static_cast<S>(pv.size());
  Tensor<S> out = Tensor<S>::scalar((pv.data - tgt->data).squaredNorm() / n);
  return t.emit(std::move(out), t.needs_grad(pred),
                [pred, tgt, n](Tape<S>& t, int o) {
                  if (!t.needs_grad(pred)) return;
                  const S g = t.grad(o).data[0];
                  t.grad(pred).data +=
                      (S(2) * g / n) * (t.val(pred).data - tgt->data);
                });
}

}  // namespace egostereo::nn
