import { defineConfig } from "vitest/config";

export default defineConfig({
  test: {
    include: ["test/**/*.test.ts"],
    // Protocol tests spawn the built runner; give slow hosts headroom.
    testTimeout: 15000,
  },
});
