import { ApiClient } from "./api.js";
import { mountApp } from "./main.js";

const root = document.getElementById("app");
if (root) {
  mountApp(root, new ApiClient(""));
}
