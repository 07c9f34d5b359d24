import { defineConfig } from "vitest/config";

export default defineConfig({
  // The bundle is served by the annotation server itself, so assets must be
  // referenced relative to wherever the bundle is mounted.
  base: "./",
  build: {
    outDir: "dist",
    emptyOutDir: true,
  },
  server: {
    // During development the data API lives in the Python process.
    proxy: {
      "/api": "http://127.0.0.1:8787",
    },
  },
  test: {
    environment: "node",
    include: ["tests/**/*.test.ts"],
  },
});
