#pragma once

#include <memory>

#include "egostereo/nn/tape.hpp"

namespace egostereo::nn {

// im2col buffer: one (Cin*KH*KW) x (OH*OW) column matrix per batch item.
// Column-major so that a single output position writes one contiguous
// column. Kept alive by the backward closure for the weight gradient.
template <class S>
using ColBuffers = std::vector<Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>>;

namespace detail {

template <class S>
void im2col(const S* x, int ci, int h, int w, int kh, int kw, int stride,
            int pad, int oh, int ow,
            Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& col) {
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      S* dst = col.data() + static_cast<Eigen::Index>(oy * ow + ox) * col.rows();
      for (int c = 0; c < ci; ++c) {
        const S* plane = x + static_cast<Eigen::Index>(c) * h * w;
        for (int ky = 0; ky < kh; ++ky) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) {
            for (int kx = 0; kx < kw; ++kx) *dst++ = S(0);
            continue;
          }
          const int ix0 = ox * stride - pad;
          for (int kx = 0; kx < kw; ++kx) {
            const int ix = ix0 + kx;
            *dst++ = (ix >= 0 && ix < w) ? plane[iy * w + ix] : S(0);
          }
        }
      }
    }
  }
}

template <class S>
void col2im_add(const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>& col,
                int ci, int h, int w, int kh, int kw, int stride, int pad,
                int oh, int ow, S* dx) {
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const S* src = col.data() + static_cast<Eigen::Index>(oy * ow + ox) * col.rows();
      for (int c = 0; c < ci; ++c) {
        S* plane = dx + static_cast<Eigen::Index>(c) * h * w;
        for (int ky = 0; ky < kh; ++ky) {
          const int iy = oy * stride - pad + ky;
          if (iy < 0 || iy >= h) {
            src += kw;
            continue;
          }
          const int ix0 = ox * stride - pad;
          for (int kx = 0; kx < kw; ++kx) {
            const int ix = ix0 + kx;
            if (ix >= 0 && ix < w) plane[iy * w + ix] += src[kx];
          }
          src += kw;
        }
      }
    }
  }
}

}  // namespace detail

// 2-d convolution, x:(N,Cin,H,W), w:(Cout,Cin,KH,KW), b:(Cout) or -1.
// Forward and backward both run as GEMMs over the im2col buffers; batch
// items are processed in index order so results are reproducible.
template <class S>
int conv2d(Tape<S>& t, int x, int w, int b, int stride, int pad) {
  const auto& xv = t.val(x);
  const auto& wv = t.val(w);
  if (xv.ndim() != 4 || wv.ndim() != 4 || xv.dim(1) != wv.dim(1)) {
    throw ShapeError("conv2d: want x (N,Ci,H,W), w (Co,Ci,KH,KW); got " +
                     xv.shape_str() + " and " + wv.shape_str());
  }
  const int n = xv.dim(0), ci = xv.dim(1), h = xv.dim(2), wd = xv.dim(3);
  const int co = wv.dim(0), kh = wv.dim(2), kw = wv.dim(3);
  if (stride < 1 || pad < 0) throw ShapeError("conv2d: bad stride/pad");
  const int oh = (h + 2 * pad - kh) / stride + 1;
  const int ow = (wd + 2 * pad - kw) / stride + 1;
  if (oh <= 0 || ow <= 0) throw ShapeError("conv2d: empty output");
  const Eigen::Index ckk = static_cast<Eigen::Index>(ci) * kh * kw;
  const Eigen::Index ohw = static_cast<Eigen::Index>(oh) * ow;

  auto cols = std::make_shared<ColBuffers<S>>(n);
  Tensor<S> out({n, co, oh, ow});
  ConstMatMap<S> wmat(wv.ptr(), co, ckk);
  for (int i = 0; i < n; ++i) {
    auto& col = (*cols)[i];
    col.resize(ckk, ohw);
    detail::im2col(xv.ptr() + static_cast<Eigen::Index>(i) * ci * h * wd, ci,
                   h, wd, kh, kw, stride, pad, oh, ow, col);
    MatMap<S> om(out.ptr() + static_cast<Eigen::Index>(i) * co * ohw, co, ohw);
    om.noalias() = wmat * col;
    if (b >= 0) om.colwise() += t.val(b).data;
  }

  const bool need =
      t.needs_grad(x) || t.needs_grad(w) || (b >= 0 && t.needs_grad(b));
  if (!need) cols->clear();  // inference: drop the buffers right away
  return t.emit(
      std::move(out), need,
      [x, w, b, stride, pad, cols](Tape<S>& t, int o) {
        const auto& xv = t.val(x);
        const auto& wv = t.val(w);
        const auto& go = t.grad(o);
        const int n = xv.dim(0), ci = xv.dim(1), h = xv.dim(2),
                  wd = xv.dim(3);
        const int co = wv.dim(0), kh = wv.dim(2), kw = wv.dim(3);
        const int oh = go.dim(2), ow = go.dim(3);
        const Eigen::Index ckk = static_cast<Eigen::Index>(ci) * kh * kw;
        const Eigen::Index ohw = static_cast<Eigen::Index>(oh) * ow;
        ConstMatMap<S> wmat(wv.ptr(), co, ckk);
        Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> dcol;
        if (t.needs_grad(x)) dcol.resize(ckk, ohw);
        for (int i = 0; i < n; ++i) {
          ConstMatMap<S> gm(go.ptr() + static_cast<Eigen::Index>(i) * co * ohw,
                            co, ohw);
          if (b >= 0 && t.needs_grad(b)) {
            t.grad(b).data += gm.rowwise().sum();
          }
          if (t.needs_grad(w)) {
            MatMap<S> gw(t.grad(w).ptr(), co, ckk);
            gw.noalias() += gm * (*cols)[i].transpose();
          }
          if (t.needs_grad(x)) {
            dcol.noalias() = wmat.transpose() * gm;
            detail::col2im_add(dcol, ci, h, wd, kh, kw, stride, pad, oh, ow,
                               t.grad(x).ptr() +
                                   static_cast<Eigen::Index>(i) * ci * h * wd);
          }
        }
      });
}

// Nearest-neighbour x2 upsampling on NCHW.
template <class S>
int upsample2x(Tape<S>& t, int x) {
  const auto& v = t.val(x);
  if (v.ndim() != 4) throw ShapeError("upsample2x: want NCHW");
  const int n = v.dim(0), c = v.dim(1), h = v.dim(2), w = v.dim(3);
  Tensor<S> out({n, c, 2 * h, 2 * w});
  const S* src = v.ptr();
  S* dst = out.ptr();
  for (Eigen::Index p = 0; p < static_cast<Eigen::Index>(n) * c; ++p) {
    const S* sp = src + p * h * w;
    S* dp = dst + p * 4 * h * w;
    for (int y = 0; y < 2 * h; ++y) {
      const S* row = sp + (y / 2) * w;
      for (int xx = 0; xx < 2 * w; ++xx) dp[y * 2 * w + xx] = row[xx / 2];
    }
  }
  return t.emit(std::move(out), t.needs_grad(x),
                [x, n, c, h, w](Tape<S>& t, int o) {
                  if (!t.needs_grad(x)) return;
                  const S* gp = t.grad(o).ptr();
                  S* gx = t.grad(x).ptr();
                  for (Eigen::Index p = 0; p < static_cast<Eigen::Index>(n) * c;
                       ++p) {
                    const S* go = gp + p * 4 * h * w;
                    S* gi = gx + p * h * w;
                    for (int y = 0; y < 2 * h; ++y) {
                      S* row = gi + (y / 2) * w;
                      for (int xx = 0; xx < 2 * w; ++xx) {
                        row[xx / 2] += go[y * 2 * w + xx];
                      }
                    }
                  }
                });
}

// Channel concatenation of two NCHW tensors with matching N,H,W.
template <class S>
int concat_channels(Tape<S>& t, int a, int b) {
  const auto& av = t.val(a);
  const auto& bv = t.val(b);
  if (av.ndim() != 4 || bv.ndim() != 4 || av.dim(0) != bv.dim(0) ||
      av.dim(2) != bv.dim(2) || av.dim(3) != bv.dim(3)) {
    throw ShapeError("concat_channels: incompatible shapes " + av.shape_str() +
                     " vs " + bv.shape_str());
  }
  const int n = av.dim(0), ca = av.dim(1), cb = bv.dim(1);
  const Eigen::Index hw = static_cast<Eigen::Index>(av.dim(2)) * av.dim(3);
  Tensor<S> out({n, ca + cb, av.dim(2), av.dim(3)});
  for (int i = 0; i < n; ++i) {
    out.data.segment(static_cast<Eigen::Index>(i) * (ca + cb) * hw, ca * hw) =
        av.data.segment(static_cast<Eigen::Index>(i) * ca * hw, ca * hw);
    out.data.segment(static_cast<Eigen::Index>(i) * (ca + cb) * hw + ca * hw,
                     cb * hw) =
        bv.data.segment(static_cast<Eigen::Index>(i) * cb * hw, cb * hw);
  }
  const bool need = t.needs_grad(a) || t.needs_grad(b);
  return t.emit(std::move(out), need,
                [a, b, n, ca, cb, hw](Tape<S>& t, int o) {
                  const auto& g = t.grad(o).data;
                  for (int i = 0; i < n; ++i) {
                    const Eigen::Index base =
                        static_cast<Eigen::Index>(i) * (ca + cb) * hw;
                    if (t.needs_grad(a)) {
                      t.grad(a).data.segment(
                          static_cast<Eigen::Index>(i) * ca * hw, ca * hw) +=
                          g.segment(base, ca * hw);
                    }
                    if (t.needs_grad(b)) {
                      t.grad(b).data.segment(
                          static_cast<Eigen::Index>(i) * cb * hw, cb * hw) +=
                          g.segment(base + ca * hw, cb * hw);
                    }
                  }
                });
}

}  // namespace egostereo::nn
