/**
 * Toy score network trained by denoising score matching.
 *
 * The model combines an inverse-variance head with a small tanh MLP
 * residual:
 *
 *   s(x, sigma) = (u * x + v) / (softplus(cRaw) + sigma^2) + MLP([x; phi(sigma)])
 *
 * The head alone can represent the perturbed score of an isotropic
 * Gaussian exactly (u -> -1, v -> mean, softplus(cRaw) -> data variance),
 * while the zero-initialized residual picks up whatever structure the head
 * cannot.  Everything is hand-rolled: explicit gradients and Adam, no
 * framework.
 */

export const SIGMA_FEATURES = 4;

export interface MlpModelJson {
  kind: "mlp";
  dims: [number, number, number];
  hidden: number;
  params: {
    u: number;
    cRaw: number;
    v: number[];
    W1: number[]; // hidden x (n + SIGMA_FEATURES), row-major
    b1: number[];
    W2: number[]; // n x hidden, row-major
    b2: number[];
  };
}

export interface GaussianModelJson {
  kind: "gaussian";
  mu: number;
  sigmaData: number;
}

export type ModelJson = MlpModelJson | GaussianModelJson;

function softplus(x: number): number {
  return x > 30 ? x : Math.log1p(Math.exp(x));
}

function sigmoid(x: number): number {
  return 1 / (1 + Math.exp(-x));
}

export function sigmaFeatures(sigma: number): Float64Array {
  return Float64Array.from([1, sigma, Math.log(sigma), 1 / (1 + sigma * sigma)]);
}

/** Closed-form score of N(mu, (sigmaData^2 + sigma^2) I); any dims. */
export function gaussianScore(x: Float64Array, sigma: number, mu: number, sigmaData: number): Float64Array {
  const out = new Float64Array(x.length);
  const inv = 1 / (sigmaData * sigmaData + sigma * sigma);
  for (let i = 0; i < x.length; i++) out[i] = (mu - x[i]) * inv;
  return out;
}

interface AdamSlot {
  m: Float64Array;
  v: Float64Array;
}

export class ScoreModel {
  readonly dims: [number, number, number];
  readonly n: number;
  readonly hidden: number;

  u: number;
  cRaw: number;
  v: Float64Array;
  W1: Float64Array;
  b1: Float64Array;
  W2: Float64Array;
  b2: Float64Array;

  // gradient accumulators
  private gU = 0;
  private gCRaw = 0;
  private gV: Float64Array;
  private gW1: Float64Array;
  private gB1: Float64Array;
  private gW2: Float64Array;
  private gB2: Float64Array;
  private batchCount = 0;

  private adam = new Map<string, AdamSlot>();
  private adamT = 0;

  constructor(dims: [number, number, number], hidden: number, seed = 1234, init?: MlpModelJson["params"]) {
    this.dims = dims;
    this.n = dims[0] * dims[1] * dims[2];
    this.hidden = hidden;
    const nIn = this.n + SIGMA_FEATURES;

    this.v = new Float64Array(this.n);
    this.W1 = new Float64Array(hidden * nIn);
    this.b1 = new Float64Array(hidden);
    this.W2 = new Float64Array(this.n * hidden);
    this.b2 = new Float64Array(this.n);

    if (init) {
      this.u = init.u;
      this.cRaw = init.cRaw;
      this.v.set(init.v);
      this.W1.set(init.W1);
      this.b1.set(init.b1);
      this.W2.set(init.W2);
      this.b2.set(init.b2);
    } else {
      // head gain starts at zero (no score) so training has to find the
      // inverse-variance law; residual output layer starts at zero too
      this.u = 0.0;
      this.cRaw = Math.log(Math.E - 1); // softplus^-1(1)
      let s = seed >>> 0;
      const rand = () => {
        s = (s * 1664525 + 1013904223) >>> 0;
        return s / 4294967296 - 0.5;
      };
      const scale = Math.sqrt(2 / nIn);
      for (let i = 0; i < this.W1.length; i++) this.W1[i] = rand() * 2 * scale;
    }

    this.gV = new Float64Array(this.n);
    this.gW1 = new Float64Array(hidden * nIn);
    this.gB1 = new Float64Array(hidden);
    this.gW2 = new Float64Array(this.n * hidden);
    this.gB2 = new Float64Array(this.n);
  }

  get cVariance(): number {
    return softplus(this.cRaw);
  }

  forward(x: Float64Array, sigma: number): Float64Array {
    return this.forwardWithHidden(x, sigma).s;
  }

  private forwardWithHidden(x: Float64Array, sigma: number): { s: Float64Array; h: Float64Array; input: Float64Array } {
    const { n, hidden } = this;
    if (x.length !== n) throw new Error(`expected ${n} values, got ${x.length}`);
    const phi = sigmaFeatures(sigma);
    const nIn = n + SIGMA_FEATURES;
    const input = new Float64Array(nIn);
    input.set(x);
    input.set(phi, n);

    const h = new Float64Array(hidden);
    for (let j = 0; j < hidden; j++) {
      let acc = this.b1[j];
      const row = j * nIn;
      for (let k = 0; k < nIn; k++) acc += this.W1[row + k] * input[k];
      h[j] = Math.tanh(acc);
    }

    const g = 1 / (this.cVariance + sigma * sigma);
    const s = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      let acc = this.b2[i];
      const row = i * hidden;
      for (let j = 0; j < hidden; j++) acc += this.W2[row + j] * h[j];
      s[i] = (this.u * x[i] + this.v[i]) * g + acc;
    }
    return { s, h, input };
  }

  /**
   * Accumulate gradients of the sigma^2-weighted denoising loss for one
   * sample: with x = x0 + sigma z, L = mean_i (sigma s_i + z_i)^2.
   * Returns the loss value.
   */
  accumulate(x: Float64Array, z: Float64Array, sigma: number): number {
    const { n, hidden } = this;
    const nIn = n + SIGMA_FEATURES;
    const { s, h, input } = this.forwardWithHidden(x, sigma);
    const g = 1 / (this.cVariance + sigma * sigma);

    let loss = 0;
    const ds = new Float64Array(n);
    for (let i = 0; i < n; i++) {
      const r = sigma * s[i] + z[i];
      loss += r * r;
      ds[i] = (2 * sigma * r) / n;
    }
    loss /= n;

    // head gradients
    let dG = 0;
    for (let i = 0; i < n; i++) {
      this.gU += ds[i] * x[i] * g;
      this.gV[i] += ds[i] * g;
      dG += ds[i] * (this.u * x[i] + this.v[i]);
    }
    this.gCRaw += dG * -(g * g) * sigmoid(this.cRaw);

    // residual gradients
    const dh = new Float64Array(hidden);
    for (let i = 0; i < n; i++) {
      const row = i * hidden;
      const d = ds[i];
      this.gB2[i] += d;
      for (let j = 0; j < hidden; j++) {
        this.gW2[row + j] += d * h[j];
        dh[j] += d * this.W2[row + j];
      }
    }
    for (let j = 0; j < hidden; j++) {
      const dpre = dh[j] * (1 - h[j] * h[j]);
      this.gB1[j] += dpre;
      const row = j * nIn;
      for (let k = 0; k < nIn; k++) this.gW1[row + k] += dpre * input[k];
    }

    this.batchCount += 1;
    return loss;
  }

  /**
   * One Adam update from the accumulated gradients, then reset them.
   * The residual MLP gets decoupled weight decay: it is a correction term
   * whose regularized optimum is zero, which keeps stochastic-gradient
   * noise from accumulating in it.
   */
  step(lr: number, beta1 = 0.9, beta2 = 0.999, eps = 1e-8, residualDecay = 1e-3): void {
    if (this.batchCount === 0) return;
    this.adamT += 1;
    const inv = 1 / this.batchCount;
    const bc1 = 1 - Math.pow(beta1, this.adamT);
    const bc2 = 1 - Math.pow(beta2, this.adamT);

    const updateArray = (name: string, param: Float64Array, grad: Float64Array, decay = 0) => {
      let slot = this.adam.get(name);
      if (!slot) {
        slot = { m: new Float64Array(param.length), v: new Float64Array(param.length) };
        this.adam.set(name, slot);
      }
      for (let i = 0; i < param.length; i++) {
        const gi = grad[i] * inv;
        slot.m[i] = beta1 * slot.m[i] + (1 - beta1) * gi;
        slot.v[i] = beta2 * slot.v[i] + (1 - beta2) * gi * gi;
        param[i] -= (lr * (slot.m[i] / bc1)) / (Math.sqrt(slot.v[i] / bc2) + eps) + lr * decay * param[i];
      }
      grad.fill(0);
    };

    const scalars = Float64Array.from([this.u, this.cRaw]);
    const scalarGrads = Float64Array.from([this.gU, this.gCRaw]);
    updateArray("scalars", scalars, scalarGrads);
    this.u = scalars[0];
    this.cRaw = scalars[1];
    this.gU = 0;
    this.gCRaw = 0;

    updateArray("v", this.v, this.gV);
    updateArray("W1", this.W1, this.gW1);
    updateArray("b1", this.b1, this.gB1);
    updateArray("W2", this.W2, this.gW2, residualDecay);
    updateArray("b2", this.b2, this.gB2, residualDecay);
    this.batchCount = 0;
  }

  /** Flat views of the trainable parameter arrays (scalars as length-1). */
  paramArrays(): Map<string, Float64Array> {
    return new Map<string, Float64Array>([
      ["scalars", Float64Array.from([this.u, this.cRaw])],
      ["v", this.v],
      ["W1", this.W1],
      ["b1", this.b1],
      ["W2", this.W2],
      ["b2", this.b2],
    ]);
  }

  setParamArrays(params: Map<string, Float64Array>): void {
    const scalars = params.get("scalars")!;
    this.u = scalars[0];
    this.cRaw = scalars[1];
    this.v.set(params.get("v")!);
    this.W1.set(params.get("W1")!);
    this.b1.set(params.get("b1")!);
    this.W2.set(params.get("W2")!);
    this.b2.set(params.get("b2")!);
  }

  toJSON(): MlpModelJson {
    return {
      kind: "mlp",
      dims: this.dims,
      hidden: this.hidden,
      params: {
        u: this.u,
        cRaw: this.cRaw,
        v: Array.from(this.v),
        W1: Array.from(this.W1),
        b1: Array.from(this.b1),
        W2: Array.from(this.W2),
        b2: Array.from(this.b2),
      },
    };
  }

  static fromJSON(json: MlpModelJson): ScoreModel {
    return new ScoreModel(json.dims, json.hidden, 0, json.params);
  }
}

/** A loaded model of either kind, exposing a uniform scoring interface. */
export interface Scorer {
  /** dims the scorer insists on, or null when shape-agnostic. */
  dims: [number, number, number] | null;
  score(x: Float64Array, sigma: number): Float64Array;
}

export function loadScorer(json: ModelJson): Scorer {
  if (json.kind === "gaussian") {
    return {
      dims: null,
      score: (x, sigma) => gaussianScore(x, sigma, json.mu, json.sigmaData),
    };
  }
  if (json.kind === "mlp") {
    const model = ScoreModel.fromJSON(json);
    return { dims: model.dims, score: (x, sigma) => model.forward(x, sigma) };
  }
  throw new Error(`unknown model kind ${(json as { kind: string }).kind}`);
}
