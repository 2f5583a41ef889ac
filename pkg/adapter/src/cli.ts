#!/usr/bin/env node
/**
 * embed-adapter <input.txt> --model <id> --mode tokens|sentence|both --out <corpus.jsonl>
 *               [--backend transformers|hash] [--source-doc <name>] [--list-models]
 */

import { readFileSync, writeFileSync } from "node:fs";

import { resolveBackend } from "./backend.js";
import { embedCorpus, OutputMode } from "./corpus.js";
import { listModels } from "./models.js";

interface Args {
  input?: string;
  model?: string;
  mode: OutputMode;
  out?: string;
  backend: string;
  sourceDoc?: string;
  list: boolean;
}

function parseArgs(argv: string[]): Args {
  const args: Args = { mode: "sentence", backend: "transformers", list: false };
  for (let i = 0; i < argv.length; i++) {
    const arg = argv[i];
    const next = () => {
      if (i + 1 >= argv.length) {
        throw new Error(`${arg} expects a value`);
      }
      return argv[++i];
    };
    switch (arg) {
      case "--model":
        args.model = next();
        break;
      case "--mode": {
        const mode = next();
        if (mode !== "tokens" && mode !== "sentence" && mode !== "both") {
          throw new Error(`--mode must be tokens, sentence or both, got ${JSON.stringify(mode)}`);
        }
        args.mode = mode;
        break;
      }
      case "--out":
        args.out = next();
        break;
      case "--backend":
        args.backend = next();
        break;
      case "--source-doc":
        args.sourceDoc = next();
        break;
      case "--list-models":
        args.list = true;
        break;
      default:
        if (arg.startsWith("-")) {
          throw new Error(`unknown flag ${arg}`);
        }
        if (args.input !== undefined) {
          throw new Error("only one input file is accepted");
        }
        args.input = arg;
    }
  }
  return args;
}

export async function main(argv: string[]): Promise<number> {
  let args: Args;
  try {
    args = parseArgs(argv);
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }

  if (args.list) {
    for (const model of listModels()) {
      console.log(`${model.id}\t${model.family}\t${model.dim}`);
    }
    return 0;
  }

  if (!args.input || !args.model || !args.out) {
    console.error("usage: embed-adapter <input.txt> --model <id> --mode <mode> --out <corpus.jsonl>");
    return 1;
  }

  try {
    const input = readFileSync(args.input, "utf-8");
    const backend = await resolveBackend(args.backend);
    const jsonl = await embedCorpus({
      input,
      modelId: args.model,
      mode: args.mode,
      backend,
      sourceDoc: args.sourceDoc,
    });
    writeFileSync(args.out, jsonl, "utf-8");
    const records = jsonl.trim().split("\n").length;
    console.error(`${records} records -> ${args.out}`);
    return 0;
  } catch (err) {
    console.error(`error: ${(err as Error).message}`);
    return 1;
  }
}

const entry = process.argv[1];
if (entry && (entry.endsWith("cli.js") || entry.endsWith("embed-adapter"))) {
  main(process.argv.slice(2)).then((code) => {
    process.exitCode = code;
  });
}
