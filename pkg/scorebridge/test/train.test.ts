import { describe, expect, it } from "vitest";

import { ScoreModel, gaussianScore, loadScorer } from "../src/model.js";
import { SeededRng } from "../src/rng.js";
import { DEFAULT_OPTIONS, makeGaussianDataset, trainToyScore } from "../src/train.js";

const TOY = {
  ...DEFAULT_OPTIONS,
  dims: [8, 8, 2] as [number, number, number],
  hidden: 32,
  datasetSize: 1000,
  epochs: 120,
  batchSize: 64,
  learningRate: 4e-2,
  seed: 3,
};

describe("denoising score-matching trainer", () => {
  it("matches the analytic Gaussian score to <10% at sigma_max", { timeout: 120_000 }, () => {
    const res = trainToyScore(TOY);
    const rng = new SeededRng(99);
    const n = res.model.n;
    const sigma = TOY.sigmaMax;
    let errNum = 0;
    let errDen = 0;
    for (let trial = 0; trial < 50; trial++) {
      const x = new Float64Array(n);
      for (let i = 0; i < n; i++) {
        x[i] = res.mean[i] + Math.sqrt(TOY.sigmaData ** 2 + sigma ** 2) * rng.normal();
      }
      const got = res.model.forward(x, sigma);
      const inv = 1 / (TOY.sigmaData ** 2 + sigma ** 2);
      for (let i = 0; i < n; i++) {
        const want = (res.mean[i] - x[i]) * inv;
        errNum += (got[i] - want) ** 2;
        errDen += want ** 2;
      }
    }
    const rel = Math.sqrt(errNum / errDen);
    expect(rel).toBeLessThan(0.1);
    // the head should have located the data variance and unit gain
    expect(res.model.u).toBeCloseTo(-1.0, 1);
    expect(res.model.cVariance).toBeCloseTo(TOY.sigmaData ** 2, 1);
  });

  it("loss decreases over the first 10 epochs", { timeout: 60_000 }, () => {
    const res = trainToyScore({ ...TOY, epochs: 12, datasetSize: 600 });
    const first = res.epochLosses.slice(0, 10);
    // monotone trend of epoch means: late half strictly below early half
    const early = first.slice(0, 5).reduce((a, b) => a + b) / 5;
    const late = first.slice(5).reduce((a, b) => a + b) / 5;
    expect(late).toBeLessThan(early);
    expect(first[9]).toBeLessThan(first[0]);
  });

  it("zero-epoch training still yields a protocol-valid model", () => {
    const res = trainToyScore({ ...TOY, epochs: 0, datasetSize: 8 });
    const out = res.model.forward(new Float64Array(res.model.n), 0.5);
    expect(out).toHaveLength(res.model.n);
    expect(Array.from(out).every(Number.isFinite)).toBe(true);
  });

  it("model JSON round trips exactly", () => {
    const res = trainToyScore({ ...TOY, epochs: 2, datasetSize: 32 });
    const json = JSON.parse(JSON.stringify(res.model.toJSON()));
    const back = ScoreModel.fromJSON(json);
    const rng = new SeededRng(7);
    const x = rng.fillNormal(new Float64Array(res.model.n));
    expect(Array.from(back.forward(x, 0.3))).toEqual(Array.from(res.model.forward(x, 0.3)));
  });

  it("dataset generator is seeded and centered on its mean", () => {
    const rng = new SeededRng(5);
    const { samples, mean } = makeGaussianDataset([4, 4, 1], 4000, 0.5, rng);
    const n = 16;
    const avg = new Float64Array(n);
    for (const s of samples) for (let i = 0; i < n; i++) avg[i] += s[i] / samples.length;
    for (let i = 0; i < n; i++) expect(Math.abs(avg[i] - mean[i])).toBeLessThan(0.05);
  });

  it("analytic gaussian scorer is shape-agnostic", () => {
    const scorer = loadScorer({ kind: "gaussian", mu: 0.5, sigmaData: 2.0 });
    const x = Float64Array.from([1, 2, 3]);
    const out = scorer.score(x, 0.5);
    const want = gaussianScore(x, 0.5, 0.5, 2.0);
    expect(Array.from(out)).toEqual(Array.from(want));
    expect(out[0]).toBeCloseTo((0.5 - 1) / (4 + 0.25), 12);
  });
});
