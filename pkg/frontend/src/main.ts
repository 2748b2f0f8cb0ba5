import { GazekitClient } from "./api.js";
import { ExplorerApp } from "./app.js";

const app = new ExplorerApp(new GazekitClient(""));
void app.init();
