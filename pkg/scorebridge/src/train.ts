/**
 * Denoising score-matching trainer on synthetic tensors.
 *
 * Each step draws a clean sample x0, a level sigma from the schedule, and
 * z ~ N(0, I); the model sees x0 + sigma * z and is fit to the transition
 * score (x0 - x) / sigma^2 under the sigma^2 weighting, which reduces the
 * per-sample objective to mean((sigma * s + z)^2).
 */

import { ScoreModel } from "./model.js";
import { SeededRng } from "./rng.js";
import { geometricSchedule, Schedule } from "./schedule.js";

export interface TrainOptions {
  dims: [number, number, number];
  hidden: number;
  datasetSize: number;
  epochs: number;
  batchSize: number;
  learningRate: number;
  seed: number;
  sigmaMin: number;
  sigmaMax: number;
  levels: number;
  /** Gaussian dataset spread around a random mean tensor. */
  sigmaData: number;
}

export const DEFAULT_OPTIONS: TrainOptions = {
  dims: [16, 16, 4],
  hidden: 48,
  datasetSize: 1000,
  epochs: 120,
  batchSize: 64,
  learningRate: 4e-2,
  seed: 0,
  sigmaMin: 0.01,
  sigmaMax: 1.0,
  levels: 10,
  sigmaData: 1.0,
};

export interface TrainResult {
  model: ScoreModel;
  epochLosses: number[];
  mean: Float64Array;
  schedule: Schedule;
}

/** Gaussian toy dataset: x0 = mean + sigmaData * noise, mean itself random. */
export function makeGaussianDataset(
  dims: [number, number, number],
  size: number,
  sigmaData: number,
  rng: SeededRng
): { samples: Float64Array[]; mean: Float64Array } {
  const n = dims[0] * dims[1] * dims[2];
  const mean = new Float64Array(n);
  for (let i = 0; i < n; i++) mean[i] = 2 * rng.next() - 1;
  const samples: Float64Array[] = [];
  for (let s = 0; s < size; s++) {
    const x = new Float64Array(n);
    for (let i = 0; i < n; i++) x[i] = mean[i] + sigmaData * rng.normal();
    samples.push(x);
  }
  return { samples, mean };
}

export function trainToyScore(opts: TrainOptions): TrainResult {
  const rng = new SeededRng(opts.seed);
  const schedule = geometricSchedule(opts.levels, opts.sigmaMin, opts.sigmaMax);
  const { samples, mean } = makeGaussianDataset(opts.dims, opts.datasetSize, opts.sigmaData, rng);
  const model = new ScoreModel(opts.dims, opts.hidden, opts.seed + 1);
  const n = model.n;

  const epochLosses: number[] = [];
  const x = new Float64Array(n);
  const z = new Float64Array(n);
  // Polyak averaging of the weights over the low-rate tail of the cosine
  // schedule; the averaged copy is what gets served
  const EMA_DECAY = 0.995;
  const emaStartEpoch = Math.floor(opts.epochs / 2);
  let ema: Map<string, Float64Array> | null = null;
  for (let epoch = 0; epoch < opts.epochs; epoch++) {
    // cosine decay to 0.5% of the base rate: the stochastic-gradient noise
    // floor scales with the step size, so the tail epochs sharpen the fit
    const lr =
      opts.learningRate *
      (0.005 + 0.995 * 0.5 * (1 + Math.cos((Math.PI * epoch) / Math.max(opts.epochs - 1, 1))));
    let lossSum = 0;
    let count = 0;
    // random sample order per epoch
    const order = samples.map((_, i) => i);
    for (let i = order.length - 1; i > 0; i--) {
      const j = rng.int(i + 1);
      [order[i], order[j]] = [order[j], order[i]];
    }
    for (let b = 0; b < order.length; b += opts.batchSize) {
      const stop = Math.min(b + opts.batchSize, order.length);
      for (let s = b; s < stop; s++) {
        const x0 = samples[order[s]];
        const sigma = schedule.sigmas[rng.int(schedule.levels)];
        // antithetic pair (z, -z): cancels the odd-in-z gradient noise,
        // which dominates the mean-path estimate, without biasing the loss
        for (let i = 0; i < n; i++) {
          z[i] = rng.normal();
          x[i] = x0[i] + sigma * z[i];
        }
        lossSum += model.accumulate(x, z, sigma);
        for (let i = 0; i < n; i++) {
          z[i] = -z[i];
          x[i] = x0[i] + sigma * z[i];
        }
        lossSum += model.accumulate(x, z, sigma);
        count += 2;
      }
      model.step(lr);
      if (epoch >= emaStartEpoch) {
        const current = model.paramArrays();
        if (ema === null) {
          ema = new Map([...current].map(([k, a]) => [k, Float64Array.from(a)]));
        } else {
          for (const [key, arr] of current) {
            const e = ema.get(key)!;
            for (let i = 0; i < arr.length; i++) e[i] = EMA_DECAY * e[i] + (1 - EMA_DECAY) * arr[i];
          }
        }
      }
    }
    const epochLoss = lossSum / count;
    if (!Number.isFinite(epochLoss) || epochLoss > 1e6) {
      throw new Error(`training diverged at epoch ${epoch}: loss ${epochLoss}`);
    }
    epochLosses.push(epochLoss);
  }
  if (ema !== null) {
    model.setParamArrays(ema);
  }
  return { model, epochLosses, mean, schedule };
}
