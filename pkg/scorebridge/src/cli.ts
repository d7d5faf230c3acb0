#!/usr/bin/env node
/**
 * scorebridge CLI.
 *
 *   train [--out model.json] [--dims 16x16x4] [--hidden 48] [--epochs 20]
 *         [--dataset 1000] [--batch 32] [--lr 5e-3] [--seed 0]
 *         [--sigma-min 0.01] [--sigma-max 1.0] [--levels 10] [--sigma-data 1.0]
 *   serve --model model.json
 *   make-gaussian --out model.json [--mu 0] [--sigma-data 1.0]
 */

import { readFileSync, writeFileSync } from "node:fs";
import process from "node:process";

import { ModelJson, loadScorer } from "./model.js";
import { serve } from "./serve.js";
import { DEFAULT_OPTIONS, trainToyScore } from "./train.js";

function parseFlags(argv: string[]): Map<string, string> {
  const flags = new Map<string, string>();
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    if (!arg.startsWith("--")) throw new Error(`unexpected argument ${arg}`);
    const value = argv[i + 1];
    if (value === undefined) throw new Error(`flag ${arg} needs a value`);
    flags.set(arg.slice(2), value);
    i++;
  }
  return flags;
}

function parseDims(text: string): [number, number, number] {
  const parts = text.split("x").map((p) => Number.parseInt(p, 10));
  if (parts.length !== 3 || parts.some((p) => !Number.isInteger(p) || p < 1)) {
    throw new Error(`--dims must look like 16x16x4, got ${text}`);
  }
  return [parts[0], parts[1], parts[2]];
}

function cmdTrain(argv: string[]): number {
  const flags = parseFlags(argv);
  const opts = { ...DEFAULT_OPTIONS };
  if (flags.has("dims")) opts.dims = parseDims(flags.get("dims")!);
  if (flags.has("hidden")) opts.hidden = Number(flags.get("hidden"));
  if (flags.has("epochs")) opts.epochs = Number(flags.get("epochs"));
  if (flags.has("dataset")) opts.datasetSize = Number(flags.get("dataset"));
  if (flags.has("batch")) opts.batchSize = Number(flags.get("batch"));
  if (flags.has("lr")) opts.learningRate = Number(flags.get("lr"));
  if (flags.has("seed")) opts.seed = Number(flags.get("seed"));
  if (flags.has("sigma-min")) opts.sigmaMin = Number(flags.get("sigma-min"));
  if (flags.has("sigma-max")) opts.sigmaMax = Number(flags.get("sigma-max"));
  if (flags.has("levels")) opts.levels = Number(flags.get("levels"));
  if (flags.has("sigma-data")) opts.sigmaData = Number(flags.get("sigma-data"));
  const out = flags.get("out") ?? "model.json";

  const result = trainToyScore(opts);
  writeFileSync(out, JSON.stringify(result.model.toJSON()));
  for (const [i, loss] of result.epochLosses.entries()) {
    console.error(`epoch ${i}: loss ${loss.toFixed(6)}`);
  }
  console.error(`saved ${out}`);
  return 0;
}

function cmdServe(argv: string[]): Promise<number> {
  const flags = parseFlags(argv);
  const path = flags.get("model");
  if (!path) throw new Error("serve needs --model <file>");
  const json = JSON.parse(readFileSync(path, "utf8")) as ModelJson;
  const scorer = loadScorer(json);
  return serve(scorer, process.stdin, process.stdout).then(() => 0);
}

function cmdMakeGaussian(argv: string[]): number {
  const flags = parseFlags(argv);
  const out = flags.get("out") ?? "gaussian.json";
  const json: ModelJson = {
    kind: "gaussian",
    mu: Number(flags.get("mu") ?? 0),
    sigmaData: Number(flags.get("sigma-data") ?? 1.0),
  };
  writeFileSync(out, JSON.stringify(json));
  console.error(`saved ${out}`);
  return 0;
}

async function main(): Promise<number> {
  const [command, ...rest] = process.argv.slice(2);
  try {
    switch (command) {
      case "train":
        return cmdTrain(rest);
      case "serve":
        return await cmdServe(rest);
      case "make-gaussian":
        return cmdMakeGaussian(rest);
      default:
        console.error("usage: scorebridge {train|serve|make-gaussian} [flags]");
        return 1;
    }
  } catch (err) {
    console.error(`scorebridge: ${err instanceof Error ? err.message : err}`);
    return 1;
  }
}

main().then((code) => {
  process.exitCode = code;
});
