#!/usr/bin/env node
// SMT-LIB2 command-line shim over the z3-solver WebAssembly build.
//
// Usage: z3smt.js [key=value ...] file.smt2 [more.smt2 ...]
//
// Accepts z3-style global parameters (e.g. smt.random_seed=7). Each input
// file is evaluated in a fresh context; with more than one file, answers are
// separated by "=== dra:query <i> ===" lines so callers can batch many small
// queries into one process.

'use strict';

const fs = require('fs');
const path = require('path');

function loadZ3() {
  try {
    return require('z3-solver');
  } catch (e) {
    const { execSync } = require('child_process');
    const globalRoot = execSync('npm root -g', { encoding: 'utf8' }).trim();
    return require(path.join(globalRoot, 'z3-solver'));
  }
}

async function main() {
  const params = [];
  const files = [];
  for (const arg of process.argv.slice(2)) {
    if (arg.includes('=') && !fs.existsSync(arg)) {
      params.push(arg.split(/=(.*)/s).slice(0, 2));
    } else {
      files.push(arg);
    }
  }
  if (files.length === 0) {
    process.stderr.write('usage: z3smt.js [key=value ...] file.smt2 ...\n');
    process.exit(2);
  }

  const { init } = loadZ3();
  const { Z3 } = await init();
  for (const [k, v] of params) {
    try {
      Z3.global_param_set(k, v);
    } catch (e) {
      process.stderr.write(`ignoring parameter ${k}: ${e}\n`);
    }
  }

  for (let i = 0; i < files.length; i++) {
    if (files.length > 1) process.stdout.write(`=== dra:query ${i} ===\n`);
    const text = fs.readFileSync(files[i], 'utf8');
    const ctx = Z3.mk_context(Z3.mk_config());
    try {
      const out = await Z3.eval_smtlib2_string(ctx, text);
      process.stdout.write(out.endsWith('\n') ? out : out + '\n');
    } catch (e) {
      process.stdout.write(`(error "${String(e).replace(/"/g, "'")}")\n`);
    } finally {
      Z3.del_context(ctx);
    }
  }
  process.exit(0);
}

main().catch((e) => {
  process.stderr.write(String(e) + '\n');
  process.exit(1);
});
