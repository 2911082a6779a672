import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    environment: "jsdom",
    // the e2e file boots a real server; give it room
    testTimeout: 120_000,
    hookTimeout: 120_000,
  },
});
