#pragma once

#include <deque>
#include <functional>
#include <utility>

#include "egostereo/nn/tensor.hpp"

namespace egostereo::nn {

// Reverse-mode tape. Ops append a value plus a closure that scatters the
// output gradient back to the inputs; backward() replays the closures in
// reverse creation order. Gradients are allocated lazily, so subgraphs that
// never influence the loss cost nothing on the way back.
//
// One tape per training step. Node ids are plain ints, which keeps model
// code free of ownership noise.
template <class S>
class Tape {
 public:
  using BackFn = std::function<void(Tape&, int out)>;

  int input(Tensor<S> value, bool needs_grad = false) {
    nodes_.push_back(Node{std::move(value), Tensor<S>{}, needs_grad, false});
    return static_cast<int>(nodes_.size()) - 1;
  }

  int emit(Tensor<S> value, bool needs_grad, BackFn back) {
    const int id = input(std::move(value), needs_grad);
    if (needs_grad && back) back_.emplace_back(id, std::move(back));
    return id;
  }

  const Tensor<S>& val(int id) const { return nodes_.at(id).value; }

  bool needs_grad(int id) const { return nodes_.at(id).needs; }

  bool grad_ready(int id) const { return nodes_.at(id).grad_alloc; }

  // Gradient buffer, zero-initialized on first touch.
  Tensor<S>& grad(int id) {
    Node& n = nodes_.at(id);
    if (!n.grad_alloc) {
      n.grad = Tensor<S>(n.value.shape);
      n.grad_alloc = true;
    }
    return n.grad;
  }

  // Seeds d(root)/d(root) = 1 and propagates. The root must be scalar.
  void backward(int root) {
    if (val(root).size() != 1) {
      throw ShapeError("Tape::backward: root must be a scalar");
    }
    grad(root).data[0] = S(1);
    for (auto it = back_.rbegin(); it != back_.rend(); ++it) {
      if (nodes_[it->first].grad_alloc) it->second(*this, it->first);
    }
  }

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor<S> value;
    Tensor<S> grad;
    bool needs = false;
    bool grad_alloc = false;
  };

  std::deque<Node> nodes_;
  std::vector<std::pair<int, BackFn>> back_;
};

}  // namespace egostereo::nn
