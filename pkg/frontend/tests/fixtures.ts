import { Demo, Taxonomy } from "../src/api.js";

/** Depth-2 tree: AI -> {Machine Learning, Computer Vision},
 * Biology -> {Genetics, Ecology}. */
export const TAXONOMY: Taxonomy = {
  depth: 2,
  nodes: [
    { id: 0, name: "<root>", level: 0, parent: 0, children: [1, 2], description: null },
    { id: 1, name: "AI", level: 1, parent: 0, children: [3, 4], description: "machines that learn" },
    { id: 2, name: "Biology", level: 1, parent: 0, children: [5, 6], description: "the study of life" },
    { id: 3, name: "Machine Learning", level: 2, parent: 1, children: [], description: "models fit to data" },
    { id: 4, name: "Computer Vision", level: 2, parent: 1, children: [], description: "images and video" },
    { id: 5, name: "Genetics", level: 2, parent: 2, children: [], description: "genes and heredity" },
    { id: 6, name: "Ecology", level: 2, parent: 2, children: [], description: "organisms and habitats" },
  ],
};

export const DEMOS: Demo[] = [
  { doc_id: "d1", text: "gradient descent on benchmarks", score: 0.987654321, labels: ["AI", "Machine Learning"] },
  { doc_id: "d2", text: "convolution over image patches", score: 0.91, labels: ["AI", "Computer Vision"] },
  { doc_id: "d3", text: "training loss curves", score: 0.88, labels: ["AI", "Machine Learning"] },
];

export const TASK = { id: "t1", text: "a neural network paper", suggestion: ["AI", "Machine Learning"] };
