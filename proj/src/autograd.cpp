#include "steerlab/autograd.hpp"

#include <cmath>
#include <stdexcept>

namespace steerlab {

Tape::Node& Tape::node(Var v) {
  if (!v.valid() || v.id >= static_cast<int32_t>(nodes_.size())) {
    throw std::invalid_argument("tape: invalid var");
  }
  return nodes_[static_cast<size_t>(v.id)];
}

const Tape::Node& Tape::node(Var v) const {
  if (!v.valid() || v.id >= static_cast<int32_t>(nodes_.size())) {
    throw std::invalid_argument("tape: invalid var");
  }
  return nodes_[static_cast<size_t>(v.id)];
}

Var Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return Var{static_cast<int32_t>(nodes_.size() - 1)};
}

void Tape::accumulate(Var v, const Tensor& g) {
  Node& n = node(v);
  if (!n.needs_grad) return;
  if (n.grad.numel() == 0) {
    n.grad = g;
  } else {
    add_inplace(n.grad, g);
  }
}

const Tensor& Tape::value(Var v) const { return node(v).value; }
const Tensor& Tape::grad(Var v) const { return node(v).grad; }

Var Tape::param(Parameter& p) {
  Node n;
  n.value = p.value;
  n.param = &p;
  n.needs_grad = true;
  n.backward = [](Tape&, Node& self) {
    if (self.grad.numel() != 0) add_inplace(self.param->grad, self.grad);
  };
  return push(std::move(n));
}

Var Tape::input(Tensor value) {
  Node n;
  n.value = std::move(value);
  n.needs_grad = false;
  return push(std::move(n));
}

Var Tape::gather_rows(Var table, std::vector<int32_t> ids) {
  const Tensor& tab = value(table);
  if (tab.rank() != 2) throw std::invalid_argument("gather_rows: table must be 2-D");
  const int64_t rows = tab.dim(0), d = tab.dim(1);
  Tensor out({static_cast<int64_t>(ids.size()), d});
  for (size_t i = 0; i < ids.size(); ++i) {
    const int32_t id = ids[i];
    if (id < 0 || id >= rows) throw std::invalid_argument("gather_rows: id out of range");
    std::copy_n(tab.data() + static_cast<int64_t>(id) * d, d,
                out.data() + static_cast<int64_t>(i) * d);
  }
  Node n;
  n.value = std::move(out);
  n.a = table;
  n.ids = std::move(ids);
  n.needs_grad = node(table).needs_grad;
  n.backward = [](Tape& t, Node& self) {
    Node& tab = t.node(self.a);
    if (!tab.needs_grad) return;
    const int64_t d = tab.value.dim(1);
    Tensor g(tab.value.shape());
    for (size_t i = 0; i < self.ids.size(); ++i) {
      const float* src = self.grad.data() + static_cast<int64_t>(i) * d;
      float* dst = g.data() + static_cast<int64_t>(self.ids[i]) * d;
      for (int64_t c = 0; c < d; ++c) dst[c] += src[c];
    }
    t.accumulate(self.a, g);
  };
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  Node n;
  n.value = steerlab::add(value(a), value(b));
  n.a = a;
  n.b = b;
  n.needs_grad = node(a).needs_grad || node(b).needs_grad;
  n.backward = [](Tape& t, Node& self) {
    t.accumulate(self.a, self.grad);
    t.accumulate(self.b, self.grad);
  };
  return push(std::move(n));
}

Var Tape::linear(Var x, Var w, Var b) {
  const Tensor& xv = value(x);
  const Tensor& wv = value(w);
  const Tensor& bv = value(b);
  Tensor y = matmul(xv, wv);
  const int64_t m = y.dim(0), ncol = y.dim(1);
  if (bv.numel() != ncol) throw std::invalid_argument("linear: bias length mismatch");
  for (int64_t i = 0; i < m; ++i) {
    float* row = y.data() + i * ncol;
    for (int64_t j = 0; j < ncol; ++j) row[j] += bv.at(j);
  }
  Node n;
  n.value = std::move(y);
  n.a = x;
  n.b = w;
  n.c = b;
  n.needs_grad = node(x).needs_grad || node(w).needs_grad || node(b).needs_grad;
  n.backward = [](Tape& t, Node& self) {
    const Tensor& dy = self.grad;
    if (t.node(self.a).needs_grad) {
      t.accumulate(self.a, matmul_nt(dy, t.value(self.b)));
    }
    if (t.node(self.b).needs_grad) {
      t.accumulate(self.b, matmul_tn(t.value(self.a), dy));
    }
    if (t.node(self.c).needs_grad) {
      const int64_t m = dy.dim(0), nc = dy.dim(1);
      Tensor db({nc});
      for (int64_t i = 0; i < m; ++i) {
        const float* row = dy.data() + i * nc;
        for (int64_t j = 0; j < nc; ++j) db.at(j) += row[j];
      }
      t.accumulate(self.c, db);
    }
  };
  return push(std::move(n));
}

Var Tape::layer_norm(Var x, Var gain, Var bias, float eps) {
  Node n;
  n.value = steerlab::layer_norm(value(x), value(gain), value(bias), eps);
  n.a = x;
  n.b = gain;
  n.c = bias;
  n.eps = eps;
  n.needs_grad = node(x).needs_grad || node(gain).needs_grad || node(bias).needs_grad;
  n.backward = [](Tape& t, Node& self) {
    const Tensor& xv = t.value(self.a);
    const Tensor& gv = t.value(self.b);
    const Tensor& dy = self.grad;
    const int64_t d = xv.dim(xv.rank() - 1);
    const int64_t rows = xv.numel() / d;
    Tensor dx(xv.shape());
    Tensor dg({d});
    Tensor db({d});
    const bool want_dx = t.node(self.a).needs_grad;
    for (int64_t r = 0; r < rows; ++r) {
      const float* xrow = xv.data() + r * d;
      const float* dyrow = dy.data() + r * d;
      float mean = 0.0f;
      for (int64_t i = 0; i < d; ++i) mean += xrow[i];
      mean /= static_cast<float>(d);
      float var = 0.0f;
      for (int64_t i = 0; i < d; ++i) {
        const float c = xrow[i] - mean;
        var += c * c;
      }
      var /= static_cast<float>(d);
      const float inv = 1.0f / std::sqrt(var + self.eps);
      float sum_dxhat = 0.0f;
      float sum_dxhat_xhat = 0.0f;
      for (int64_t i = 0; i < d; ++i) {
        const float xhat = (xrow[i] - mean) * inv;
        const float dxhat = dyrow[i] * gv.at(i);
        dg.at(i) += dyrow[i] * xhat;
        db.at(i) += dyrow[i];
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat;
      }
      if (want_dx) {
        float* dxrow = dx.data() + r * d;
        const float invd = 1.0f / static_cast<float>(d);
        for (int64_t i = 0; i < d; ++i) {
          const float xhat = (xrow[i] - mean) * inv;
          const float dxhat = dyrow[i] * gv.at(i);
          dxrow[i] = inv * (dxhat - sum_dxhat * invd - xhat * sum_dxhat_xhat * invd);
        }
      }
    }
    if (want_dx) t.accumulate(self.a, dx);
    if (t.node(self.b).needs_grad) t.accumulate(self.b, dg);
    if (t.node(self.c).needs_grad) t.accumulate(self.c, db);
  };
  return push(std::move(n));
}

Var Tape::gelu(Var x) {
  Node n;
  n.value = steerlab::gelu(value(x));
  n.a = x;
  n.needs_grad = node(x).needs_grad;
  n.backward = [](Tape& t, Node& self) {
    if (!t.node(self.a).needs_grad) return;
    const Tensor& xv = t.value(self.a);
    Tensor dx(xv.shape());
    const int64_t nn = xv.numel();
    for (int64_t i = 0; i < nn; ++i) {
      dx.at(i) = self.grad.at(i) * gelu_grad_scalar(xv.at(i));
    }
    t.accumulate(self.a, dx);
  };
  return push(std::move(n));
}

Var Tape::attention_core(Var qkv, int64_t batch, int64_t seqlen, int heads) {
  const Tensor& q3 = value(qkv);
  if (q3.rank() != 2 || q3.dim(0) != batch * seqlen || q3.dim(1) % 3 != 0) {
    throw std::invalid_argument("attention_core: bad qkv shape");
  }
  const int64_t d = q3.dim(1) / 3;
  if (d % heads != 0) throw std::invalid_argument("attention_core: heads must divide d");
  const int64_t hd = d / heads;
  const float inv_sqrt_hd = 1.0f / std::sqrt(static_cast<float>(hd));

  Tensor out({batch * seqlen, d});
  Tensor probs({batch * heads, seqlen, seqlen});
  const float* qp = q3.data();
  const int64_t stride = 3 * d;

#pragma omp parallel for schedule(static)
  for (int64_t bh = 0; bh < batch * heads; ++bh) {
    const int64_t b = bh / heads;
    const int64_t h = bh % heads;
    const int64_t base = b * seqlen;
    const int64_t qoff = h * hd, koff = d + h * hd, voff = 2 * d + h * hd;
    float* prob_bh = probs.data() + bh * seqlen * seqlen;
    for (int64_t t = 0; t < seqlen; ++t) {
      const float* qrow = qp + (base + t) * stride + qoff;
      float* prow = prob_bh + t * seqlen;
      float mx = -1e30f;
      for (int64_t u = 0; u <= t; ++u) {
        const float* krow = qp + (base + u) * stride + koff;
        float s = 0.0f;
        for (int64_t c = 0; c < hd; ++c) s += qrow[c] * krow[c];
        s *= inv_sqrt_hd;
        prow[u] = s;
        mx = std::max(mx, s);
      }
      float sum = 0.0f;
      for (int64_t u = 0; u <= t; ++u) {
        const float e = std::exp(prow[u] - mx);
        prow[u] = e;
        sum += e;
      }
      const float inv = 1.0f / sum;
      float* orow = out.data() + (base + t) * d + h * hd;
      for (int64_t u = 0; u <= t; ++u) {
        prow[u] *= inv;
        const float p = prow[u];
        const float* vrow = qp + (base + u) * stride + voff;
        for (int64_t c = 0; c < hd; ++c) orow[c] += p * vrow[c];
      }
    }
  }

  Node n;
  n.value = std::move(out);
  n.saved = std::move(probs);
  n.a = qkv;
  n.batch = batch;
  n.seqlen = seqlen;
  n.heads = heads;
  n.needs_grad = node(qkv).needs_grad;
  n.backward = [](Tape& t, Node& self) {
    if (!t.node(self.a).needs_grad) return;
    const Tensor& q3 = t.value(self.a);
    const Tensor& dy = self.grad;
    const int64_t d = q3.dim(1) / 3;
    const int64_t heads = self.heads;
    const int64_t hd = d / heads;
    const int64_t seqlen = self.seqlen;
    const float inv_sqrt_hd = 1.0f / std::sqrt(static_cast<float>(hd));
    Tensor dqkv(q3.shape());
    const int64_t stride = 3 * d;
    const float* qp = q3.data();
    float* dqp = dqkv.data();

#pragma omp parallel for schedule(static)
    for (int64_t bh = 0; bh < self.batch * heads; ++bh) {
      const int64_t b = bh / heads;
      const int64_t h = bh % heads;
      const int64_t base = b * seqlen;
      const int64_t qoff = h * hd, koff = d + h * hd, voff = 2 * d + h * hd;
      const float* prob_bh = self.saved.data() + bh * seqlen * seqlen;
      std::vector<float> datt(static_cast<size_t>(seqlen));
      for (int64_t t = 0; t < seqlen; ++t) {
        const float* prow = prob_bh + t * seqlen;
        const float* dyrow = dy.data() + (base + t) * d + h * hd;
        // datt[u] = dout_t . v_u ; dv_u += p[u] * dout_t
        for (int64_t u = 0; u <= t; ++u) {
          const float* vrow = qp + (base + u) * stride + voff;
          float* dvrow = dqp + (base + u) * stride + voff;
          float acc = 0.0f;
          const float p = prow[u];
          for (int64_t c = 0; c < hd; ++c) {
            acc += dyrow[c] * vrow[c];
            dvrow[c] += p * dyrow[c];
          }
          datt[static_cast<size_t>(u)] = acc;
        }
        float dot = 0.0f;
        for (int64_t u = 0; u <= t; ++u) dot += prow[u] * datt[static_cast<size_t>(u)];
        const float* qrow = qp + (base + t) * stride + qoff;
        float* dqrow = dqp + (base + t) * stride + qoff;
        for (int64_t u = 0; u <= t; ++u) {
          const float ds = prow[u] * (datt[static_cast<size_t>(u)] - dot) * inv_sqrt_hd;
          const float* krow = qp + (base + u) * stride + koff;
          float* dkrow = dqp + (base + u) * stride + koff;
          for (int64_t c = 0; c < hd; ++c) {
            dqrow[c] += ds * krow[c];
            dkrow[c] += ds * qrow[c];
          }
        }
      }
    }
    t.accumulate(self.a, dqkv);
  };
  return push(std::move(n));
}

double Tape::cross_entropy_loss(Var logits, std::vector<int32_t> targets,
                                std::vector<uint8_t> mask) {
  const Tensor& lv = value(logits);
  const float loss = cross_entropy(lv, targets, mask);
  loss_logits_ = logits;
  loss_targets_ = std::move(targets);
  loss_mask_ = std::move(mask);
  has_loss_ = true;
  return static_cast<double>(loss);
}

void Tape::backward() {
  if (!has_loss_) throw std::logic_error("tape: backward without a loss root");
  accumulate(loss_logits_,
             cross_entropy_grad(value(loss_logits_), loss_targets_, loss_mask_));
  for (size_t i = nodes_.size(); i-- > 0;) {
    Node& n = nodes_[i];
    if (n.backward && n.grad.numel() != 0) {
      n.backward(*this, n);
    }
    // Reverse order means nothing before i reads this node again; release
    // activations as we go to keep the peak footprint flat.
    n.grad = Tensor();
    n.saved = Tensor();
    if (!n.param) n.value = Tensor();
  }
}

}  // namespace steerlab
